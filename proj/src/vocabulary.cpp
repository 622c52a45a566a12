#include "semvol/vocabulary.hpp"

#include "semvol/error.hpp"
#include "semvol/log.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <unordered_set>

namespace semvol {

Vocabulary::Vocabulary(std::vector<CompoundTerm> entries, std::size_t seed_count)
    : entries_(std::move(entries)), seed_count_(seed_count) {
  if (seed_count_ > entries_.size()) throw DataError("seed count exceeds vocabulary size");
}

namespace {

bool resolvable(const EmbeddingTable& table, const CompoundTerm& term) {
  if (table.contains(term.key())) return true;
  return std::all_of(term.components().begin(), term.components().end(),
                     [&](const std::string& c) { return table.contains(c); });
}

}  // namespace

Vocabulary build_vocabulary(std::span<const CompoundTerm> seeds,
                            std::span<const std::string> expansion,
                            std::size_t size_target, const EmbeddingTable& table) {
  if (seeds.empty()) throw DataError("vocabulary needs at least one seed term");

  std::vector<CompoundTerm> entries;
  std::unordered_set<std::string> present;
  for (const auto& seed : seeds) {
    if (!resolvable(table, seed)) {
      throw DataError("seed term '" + seed.display() + "' not resolvable in embedding table");
    }
    if (present.insert(seed.key()).second) entries.push_back(seed);
  }
  if (size_target < entries.size()) {
    throw DataError("vocabulary size target " + std::to_string(size_target) +
                    " is smaller than the " + std::to_string(entries.size()) + " seed terms");
  }
  const std::size_t seed_count = entries.size();

  std::size_t skipped = 0;
  for (const auto& word : expansion) {
    if (entries.size() >= size_target) break;
    const std::string token = to_lower(word);
    if (!is_valid_token(token) || present.contains(token)) continue;
    if (!table.contains(token)) {
      ++skipped;
      log()->debug("expansion word '{}' not in embedding table, skipped", token);
      continue;
    }
    present.insert(token);
    entries.emplace_back(std::vector<std::string>{token});
  }
  if (skipped) log()->info("{} expansion words missing from the embedding table", skipped);
  if (entries.size() < size_target) {
    log()->warn("vocabulary has {} entries, below the target of {} (expansion exhausted)",
                entries.size(), size_target);
  }
  return Vocabulary(std::move(entries), seed_count);
}

std::vector<std::string> flatten_tokens(const Vocabulary& vocab) {
  std::vector<std::string> tokens;
  std::unordered_set<std::string> seen;
  for (const auto& entry : vocab.entries()) {
    for (const auto& c : entry.components()) {
      if (seen.insert(c).second) tokens.push_back(c);
    }
  }
  return tokens;
}

namespace {

std::string strip_comment(std::string line) {
  if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  const auto first = line.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = line.find_last_not_of(" \t\r");
  return line.substr(first, last - first + 1);
}

}  // namespace

std::vector<CompoundTerm> read_term_list(std::istream& in) {
  std::vector<CompoundTerm> terms;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_comment(std::move(line));
    if (!line.empty()) terms.push_back(CompoundTerm::parse(line));
  }
  return terms;
}

std::vector<CompoundTerm> load_term_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open term list " + path.string());
  return read_term_list(in);
}

std::vector<std::string> read_word_list(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_comment(std::move(line));
    if (line.empty()) continue;
    if (!is_valid_token(line)) throw DataError("word list entry '" + line + "' is not a single token");
    words.push_back(to_lower(line));
  }
  return words;
}

std::vector<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word list " + path.string());
  return read_word_list(in);
}

}  // namespace semvol
