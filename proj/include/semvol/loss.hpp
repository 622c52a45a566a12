#pragma once

#include "semvol/embeddings.hpp"
#include "semvol/vocabulary.hpp"

#include <span>

namespace semvol {

/// Mean squared difference between original-space and reduced-space cosines
/// over all unordered pairs of vocabulary entries.
double pairwise_cosine_loss(const EmbeddingTable& original,
                            const EmbeddingTable& reduced, const Vocabulary& vocab);

/// Same loss over two precomputed cosine matrices (strict upper triangle).
double pairwise_cosine_loss(const Matrix& original_cosines,
                            const Matrix& reduced_cosines);

/// Mean over vectors of (||v|| - radius)^2.
double ring_penalty(std::span<const Vector> vectors, double radius);

}  // namespace semvol
