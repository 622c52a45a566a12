#pragma once

#include "semvol/embeddings.hpp"
#include "semvol/vocabulary.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace semvol {

/// One affine layer; `weight` is out x in.
struct DenseLayer {
  Matrix weight;
  Vector bias;
};

/// Fully connected encoder: ReLU on every hidden layer, linear output.
class EncoderModel {
 public:
  EncoderModel() = default;
  /// Zero-initialised parameters for the given widths (input first).
  explicit EncoderModel(std::vector<std::size_t> layer_dims);

  /// Uniform fan-in (He-style) initialisation: weights in
  /// [-sqrt(6/fan_in), sqrt(6/fan_in)], biases zero.
  static EncoderModel he_uniform(std::vector<std::size_t> layer_dims, std::uint64_t seed);

  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::size_t parameter_count() const;
  bool all_finite() const;

  /// Throws DataError on an input dimension mismatch and NumericError on
  /// non-finite parameters.
  Vector forward(const Vector& input) const;
  /// Column-wise forward pass; `inputs` is input_dim x N.
  Matrix forward(const Matrix& inputs) const;

  friend bool operator==(const EncoderModel&, const EncoderModel&);

 private:
  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
};

enum class Normalization { RingLoss, PostHocUnit, None };

std::string_view to_string(Normalization mode);
/// Accepts "ring_loss", "post_hoc_unit", "none".
Normalization parse_normalization(std::string_view text);

struct TrainConfig {
  std::size_t output_dim = 16;
  std::vector<std::size_t> hidden_dims = {200, 150};
  double ring_loss_weight = 0.1;
  double ring_radius = 1.0;
  double learning_rate = 1e-3;
  std::size_t epochs = 2000;
  std::uint64_t seed = 0;
  Normalization normalization = Normalization::RingLoss;
  /// Stop when the best loss improved by less than `early_stop_delta` over the
  /// last `early_stop_window` epochs. A window of 0 disables early stopping.
  std::size_t early_stop_window = 50;
  double early_stop_delta = 1e-6;

  void validate() const;
};

struct EpochLoss {
  std::size_t epoch = 0;
  double pair_loss = 0.0;
  double ring_penalty = 0.0;
  double total = 0.0;
};

struct TrainReport {
  std::vector<EpochLoss> history;
  double final_pair_loss = 0.0;
  double final_ring_penalty = 0.0;
  bool early_stopped = false;
};

/// Objective pieces: pairwise cosine loss over the columns of the encoded
/// batch plus `ring_weight` times the ring penalty.
struct ObjectiveTerms {
  double pair_loss = 0.0;
  double ring_penalty = 0.0;
  double total = 0.0;
};

/// Evaluates the training objective for `inputs` (input_dim x N) against the
/// original-space cosine matrix. When `gradient` is non-null it receives
/// d(total)/d(parameter) with the same layout as `model`.
ObjectiveTerms evaluate_objective(const EncoderModel& model, const Matrix& inputs,
                                  const Matrix& target_cosines, double ring_weight,
                                  double ring_radius, EncoderModel* gradient = nullptr);

struct TrainResult {
  EncoderModel model;
  EmbeddingTable reduced;
  TrainReport report;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

/// Trains on the flattened vocabulary tokens with full-batch Adam. The reduced
/// table holds every token mapped through the trained encoder (post-processed
/// according to cfg.normalization). Deterministic for a fixed seed. Throws
/// NumericError if the loss becomes non-finite.
TrainResult train_encoder(const EmbeddingTable& original, const Vocabulary& vocab,
                          const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Maps `tokens` through `model` into a new table.
EmbeddingTable encode_table(const EncoderModel& model, const EmbeddingTable& original,
                            std::span<const std::string> tokens, Normalization normalization);

}  // namespace semvol
