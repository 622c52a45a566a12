#pragma once

#include "semvol/embeddings.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace semvol {

/// Task-relevant terms over which the reducer preserves cosine structure.
/// Seeds come first and are never evicted.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<CompoundTerm> entries, std::size_t seed_count);

  const std::vector<CompoundTerm>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t seed_count() const { return seed_count_; }
  std::span<const CompoundTerm> seeds() const {
    return std::span(entries_).first(seed_count_);
  }

 private:
  std::vector<CompoundTerm> entries_;
  std::size_t seed_count_ = 0;
};

/// Seeds plus the first admissible expansion words (present in `table`, not
/// already included) until `size_target` is reached. Duplicate seeds are
/// merged. Throws DataError for an unresolvable seed or a target smaller than
/// the number of distinct seeds.
Vocabulary build_vocabulary(std::span<const CompoundTerm> seeds,
                            std::span<const std::string> expansion,
                            std::size_t size_target, const EmbeddingTable& table);

/// Order-stable, deduplicated union of every component token.
std::vector<std::string> flatten_tokens(const Vocabulary& vocab);

/// One compound term per line; '#' starts a comment, blank lines skipped.
std::vector<CompoundTerm> read_term_list(std::istream& in);
std::vector<CompoundTerm> load_term_list(const std::filesystem::path& path);

/// One token per line (lowercased); '#' comments and blank lines skipped.
std::vector<std::string> read_word_list(std::istream& in);
std::vector<std::string> load_word_list(const std::filesystem::path& path);

}  // namespace semvol
