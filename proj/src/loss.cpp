#include "semvol/loss.hpp"

#include "semvol/error.hpp"

#include <cmath>

namespace semvol {

double pairwise_cosine_loss(const Matrix& original_cosines, const Matrix& reduced_cosines) {
  const Eigen::Index n = original_cosines.rows();
  if (original_cosines.cols() != n || reduced_cosines.rows() != n ||
      reduced_cosines.cols() != n) {
    throw DataError("pairwise loss: cosine matrices must be square and equally sized");
  }
  if (n < 2) throw DataError("pairwise loss needs at least two entries");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = original_cosines(i, j) - reduced_cosines(i, j);
      sum += d * d;
    }
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return sum / pairs;
}

double pairwise_cosine_loss(const EmbeddingTable& original, const EmbeddingTable& reduced,
                            const Vocabulary& vocab) {
  if (vocab.size() < 2) throw DataError("pairwise loss needs at least two vocabulary entries");
  return pairwise_cosine_loss(pairwise_cosine_matrix(original, vocab.entries()),
                              pairwise_cosine_matrix(reduced, vocab.entries()));
}

double ring_penalty(std::span<const Vector> vectors, double radius) {
  if (vectors.empty()) throw DataError("ring penalty needs at least one vector");
  double sum = 0.0;
  for (const auto& v : vectors) {
    const double d = v.norm() - radius;
    sum += d * d;
  }
  return sum / static_cast<double>(vectors.size());
}

}  // namespace semvol
