#pragma once

#include "semvol/embeddings.hpp"
#include "semvol/vocabulary.hpp"

#include <cstddef>

namespace semvol {

/// Removes the mean and the projections onto the top `components` principal
/// directions from the columns of `data` (dim x N). A count of zero leaves the
/// data untouched.
void remove_dominant_directions(Matrix& data, std::size_t components);

/// Post-process, project onto the top `dimension` principal components, then
/// post-process again in the reduced space. Operates on the flattened
/// vocabulary tokens. Throws DataError when dimension >= token count and
/// NumericError when the covariance rank is below `dimension`.
EmbeddingTable pca_reduce(const EmbeddingTable& original, const Vocabulary& vocab,
                          std::size_t dimension, std::size_t components_removed = 2);

}  // namespace semvol
