#include "semvol/pca.hpp"

#include "semvol/error.hpp"

#include <Eigen/Eigenvalues>

namespace semvol {

namespace {

struct Principal {
  Vector values;   // descending
  Matrix vectors;  // columns match `values`
};

Principal principal_axes(const Matrix& data) {
  const Vector mean = data.rowwise().mean();
  const Matrix centered = data.colwise() - mean;
  const Matrix covariance = centered * centered.transpose() / static_cast<double>(data.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
  if (solver.info() != Eigen::Success) throw NumericError("PCA eigendecomposition failed");
  // Eigen returns ascending eigenvalues.
  return {solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
}

}  // namespace

void remove_dominant_directions(Matrix& data, std::size_t components) {
  if (components == 0) return;
  if (components > static_cast<std::size_t>(data.rows())) {
    throw DataError("cannot remove more principal directions than the data dimension");
  }
  const Vector mean = data.rowwise().mean();
  data.colwise() -= mean;
  const Principal axes = principal_axes(data);
  const Matrix top = axes.vectors.leftCols(static_cast<Eigen::Index>(components));
  data -= top * (top.transpose() * data);
}

EmbeddingTable pca_reduce(const EmbeddingTable& original, const Vocabulary& vocab,
                          std::size_t dimension, std::size_t components_removed) {
  if (dimension < 1) throw DataError("PCA target dimension must be at least 1");
  const std::vector<std::string> tokens = flatten_tokens(vocab);
  if (dimension >= tokens.size()) {
    throw DataError("PCA target dimension " + std::to_string(dimension) +
                    " must be smaller than the vocabulary token count " +
                    std::to_string(tokens.size()));
  }
  if (components_removed >= dimension) {
    throw DataError("PCA removes " + std::to_string(components_removed) +
                    " dominant directions, which leaves nothing of a " +
                    std::to_string(dimension) + "-dimensional result");
  }
  if (dimension > original.dimension()) {
    throw DataError("PCA target dimension exceeds the input dimension");
  }

  Matrix data(static_cast<Eigen::Index>(original.dimension()),
              static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    data.col(static_cast<Eigen::Index>(i)) = original.at(tokens[i]);
  }

  remove_dominant_directions(data, components_removed);

  const Principal axes = principal_axes(data);
  const auto d = static_cast<Eigen::Index>(dimension);
  const double largest = axes.values[0];
  if (!(largest > 0.0) || axes.values[d - 1] <= 1e-12 * largest) {
    throw NumericError("degenerate covariance: rank below target dimension " +
                       std::to_string(dimension));
  }
  Matrix reduced = axes.vectors.leftCols(d).transpose() * data;

  remove_dominant_directions(reduced, components_removed);

  EmbeddingTable table(dimension);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    table.add(tokens[i], reduced.col(static_cast<Eigen::Index>(i)));
  }
  return table;
}

}  // namespace semvol
