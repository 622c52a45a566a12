#pragma once

#include "semvol/embeddings.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace semvol::synthetic {

/// Word -> category memberships, in first-appearance order.
struct CategorizedWords {
  std::vector<std::string> words;
  std::vector<std::vector<std::string>> categories;  // parallel to words
};

/// "[category]" headers followed by whitespace-separated words; '#' comments.
CategorizedWords read_categories(std::istream& in);
CategorizedWords load_categories(const std::filesystem::path& path);

struct SyntheticParams {
  std::size_t dimension = 300;
  std::size_t latent_dims = 96;
  double latent_decay = 100.0;   // latent scale k is exp(-k / decay)
  double word_spread = 0.7;      // per-word deviation from its category centre
  double frequency_weight = 0.7; // shared direction every word leans towards
  double noise = 0.5;            // isotropic per-word noise
  std::uint64_t seed = 7;
};

/// Stand-in for a pretrained table: each word is a unit latent direction
/// (category centre plus a word-specific offset) embedded in `dimension`
/// dimensions, plus a common frequency direction and isotropic noise. Pairwise
/// cosines are mostly positive with related words clustering, as in
/// distributional embeddings.
EmbeddingTable make_table(const CategorizedWords& words, const SyntheticParams& params = {});

}  // namespace semvol::synthetic
