#pragma once

#include "semvol/embeddings.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace semvol {

/// Uniformly random unit vectors, one per name (keyed by CompoundTerm::key()).
EmbeddingTable generate_random_table(std::span<const CompoundTerm> names,
                                     std::size_t dimension, std::uint64_t seed);

struct PermutationResult {
  EmbeddingTable table;
  /// names[i] carries the composed vector of names[source[i]].
  std::vector<std::size_t> source;
};

/// Reassigns the composed vectors of `names` by a seeded uniform permutation,
/// redrawing while the permutation is the identity (for more than one name).
PermutationResult permutate_table(const EmbeddingTable& reduced,
                                  std::span<const CompoundTerm> names, std::uint64_t seed);

/// Joint/object pairing read from a pairing file.
struct Pairing {
  std::vector<std::pair<CompoundTerm, CompoundTerm>> pairs;  // (joint, object)
  bool cyclic = false;
};

/// Lines "joint name = object name"; a line "@cyclic" allows one object to be
/// paired with several joints. '#' comments.
Pairing read_pairing(std::istream& in);
Pairing load_pairing(const std::filesystem::path& path);

/// Every joint takes its paired object's vector and every object the vector of
/// the first joint paired with it. Without `cyclic`, the pairing must be a
/// bijection. Throws DataError for unmapped or unknown names.
EmbeddingTable switch_table(const EmbeddingTable& reduced,
                            std::span<const CompoundTerm> joint_names,
                            std::span<const CompoundTerm> object_names,
                            const Pairing& pairing);

}  // namespace semvol
