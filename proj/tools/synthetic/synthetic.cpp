#include "synthetic.hpp"

#include "semvol/error.hpp"
#include "semvol/random.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace semvol::synthetic {

CategorizedWords read_categories(std::istream& in) {
  CategorizedWords out;
  std::map<std::string, std::size_t> index;
  std::string current;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string word;
    while (fields >> word) {
      if (word.front() == '[' && word.back() == ']') {
        current = word.substr(1, word.size() - 2);
        continue;
      }
      if (current.empty()) throw DataError("category file: word '" + word + "' before any [section]");
      word = to_lower(word);
      auto [it, inserted] = index.emplace(word, out.words.size());
      if (inserted) {
        out.words.push_back(word);
        out.categories.emplace_back();
      }
      out.categories[it->second].push_back(current);
    }
  }
  return out;
}

CategorizedWords load_categories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open category file " + path.string());
  return read_categories(in);
}

EmbeddingTable make_table(const CategorizedWords& words, const SyntheticParams& params) {
  const auto dim = static_cast<Eigen::Index>(params.dimension);
  const auto latent = static_cast<Eigen::Index>(params.latent_dims);
  Rng rng(derive_seed(params.seed, "synthetic.table"));

  Vector scales(latent);
  for (Eigen::Index k = 0; k < latent; ++k) {
    scales[k] = std::exp(-static_cast<double>(k) / params.latent_decay);
  }
  Matrix mixing(dim, latent);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < latent; ++c) mixing(r, c) = rng.normal();
  }
  Vector frequency(dim);
  for (Eigen::Index r = 0; r < dim; ++r) frequency[r] = rng.normal();
  frequency.normalize();

  // Category centres are drawn in first-use order.
  std::map<std::string, Vector> centres;
  for (const auto& cats : words.categories) {
    for (const auto& c : cats) {
      if (centres.contains(c)) continue;
      Vector centre(latent);
      for (Eigen::Index k = 0; k < latent; ++k) centre[k] = rng.normal() * scales[k];
      centres.emplace(c, centre);
    }
  }

  EmbeddingTable table(params.dimension);
  for (std::size_t i = 0; i < words.words.size(); ++i) {
    Vector z = Vector::Zero(latent);
    for (const auto& c : words.categories[i]) z += centres.at(c);
    z /= static_cast<double>(words.categories[i].size());
    for (Eigen::Index k = 0; k < latent; ++k) z[k] += params.word_spread * rng.normal() * scales[k];
    Vector x = mixing * z;
    x.normalize();
    x += params.frequency_weight * frequency;
    const double noise_scale = params.noise / std::sqrt(static_cast<double>(dim));
    for (Eigen::Index r = 0; r < dim; ++r) x[r] += noise_scale * rng.normal();
    table.add(words.words[i], x);
  }
  return table;
}

}  // namespace semvol::synthetic
