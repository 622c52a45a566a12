#include "semvol/encoder.hpp"

#include "semvol/error.hpp"
#include "semvol/log.hpp"
#include "semvol/random.hpp"

#include <cmath>
#include <limits>

namespace semvol {

EncoderModel::EncoderModel(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) throw DataError("encoder needs at least input and output widths");
  for (std::size_t d : dims_) {
    if (d == 0) throw DataError("encoder layer widths must be positive");
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const auto out = static_cast<Eigen::Index>(dims_[l + 1]);
    const auto in = static_cast<Eigen::Index>(dims_[l]);
    layers_.push_back({Matrix::Zero(out, in), Vector::Zero(out)});
  }
}

EncoderModel EncoderModel::he_uniform(std::vector<std::size_t> layer_dims, std::uint64_t seed) {
  EncoderModel model(std::move(layer_dims));
  Rng rng(seed);
  for (auto& layer : model.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.cols()));
    // Row-major fill so the draw order matches the checkpoint layout.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = rng.uniform(-limit, limit);
      }
    }
  }
  return model;
}

std::size_t EncoderModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool EncoderModel::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

Matrix EncoderModel::forward(const Matrix& inputs) const {
  if (dims_.empty()) throw DataError("encoder has no layers");
  if (static_cast<std::size_t>(inputs.rows()) != input_dim()) {
    throw DataError("encoder input has dimension " + std::to_string(inputs.rows()) +
                    ", expected " + std::to_string(input_dim()));
  }
  if (!all_finite()) throw NumericError("encoder has non-finite parameters");
  Matrix a = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = layers_[l].weight * a;
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Vector EncoderModel::forward(const Vector& input) const {
  return forward(Matrix(input)).col(0);
}

bool operator==(const EncoderModel& a, const EncoderModel& b) {
  if (a.dims_ != b.dims_) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (a.layers_[l].weight != b.layers_[l].weight || a.layers_[l].bias != b.layers_[l].bias) {
      return false;
    }
  }
  return true;
}

std::string_view to_string(Normalization mode) {
  switch (mode) {
    case Normalization::RingLoss: return "ring_loss";
    case Normalization::PostHocUnit: return "post_hoc_unit";
    case Normalization::None: return "none";
  }
  return "?";
}

Normalization parse_normalization(std::string_view text) {
  if (text == "ring_loss") return Normalization::RingLoss;
  if (text == "post_hoc_unit") return Normalization::PostHocUnit;
  if (text == "none") return Normalization::None;
  throw DataError("unknown normalization mode '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (output_dim < 1) throw DataError("output dimension must be at least 1");
  if (epochs < 1) throw DataError("epochs must be at least 1");
  if (!(ring_loss_weight >= 0.0) || !std::isfinite(ring_loss_weight)) {
    throw DataError("ring loss weight must be finite and non-negative");
  }
  if (!std::isfinite(ring_radius) || ring_radius < 0.0) {
    throw DataError("ring radius must be finite and non-negative");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw DataError("learning rate must be positive");
  }
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw DataError("hidden layer widths must be positive");
  }
}

ObjectiveTerms evaluate_objective(const EncoderModel& model, const Matrix& inputs,
                                  const Matrix& target_cosines, double ring_weight,
                                  double ring_radius, EncoderModel* gradient) {
  const Eigen::Index n = inputs.cols();
  if (n < 2) throw DataError("objective needs at least two inputs");
  if (target_cosines.rows() != n || target_cosines.cols() != n) {
    throw DataError("target cosine matrix does not match the input count");
  }
  if (static_cast<std::size_t>(inputs.rows()) != model.input_dim()) {
    throw DataError("objective input dimension does not match the encoder");
  }
  if (!model.all_finite()) throw NumericError("encoder has non-finite parameters");

  const auto& layers = model.layers();
  // Pre-activations for each layer; activations[l] is the input to layer l.
  std::vector<Matrix> activations{inputs};
  std::vector<Matrix> pre;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = layers[l].weight * activations.back();
    z.colwise() += layers[l].bias;
    pre.push_back(z);
    if (l + 1 < layers.size()) activations.push_back(z.cwiseMax(0.0));
  }
  const Matrix& output = pre.back();

  const Vector norms = output.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(norms[i] > 0.0) || !std::isfinite(norms[i])) {
      throw NumericError("encoder produced a zero-norm or non-finite output vector");
    }
  }
  Matrix unit = output;
  for (Eigen::Index i = 0; i < n; ++i) unit.col(i) /= norms[i];
  const Matrix reduced_cosines = unit.transpose() * unit;

  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  double pair_sum = 0.0;
  // Symmetric d(pair_loss)/d(cosine), zero diagonal.
  Matrix dcos = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double e = reduced_cosines(i, j) - target_cosines(i, j);
      pair_sum += e * e;
      dcos(i, j) = dcos(j, i) = 2.0 * e / pairs;
    }
  }
  double ring_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = norms[i] - ring_radius;
    ring_sum += d * d;
  }

  ObjectiveTerms terms;
  terms.pair_loss = pair_sum / pairs;
  terms.ring_penalty = ring_sum / static_cast<double>(n);
  terms.total = terms.pair_loss + ring_weight * terms.ring_penalty;

  if (gradient) {
    const Matrix dunit = unit * dcos;
    Matrix delta(output.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto u = unit.col(i);
      const auto g = dunit.col(i);
      delta.col(i) = (g - u * u.dot(g)) / norms[i] +
                     (ring_weight * 2.0 * (norms[i] - ring_radius) / static_cast<double>(n)) * u;
    }
    *gradient = EncoderModel(model.layer_dims());
    auto& grads = gradient->layers();
    for (std::size_t l = layers.size(); l-- > 0;) {
      grads[l].weight = delta * activations[l].transpose();
      grads[l].bias = delta.rowwise().sum();
      if (l > 0) {
        delta = (layers[l].weight.transpose() * delta)
                    .cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
      }
    }
  }
  return terms;
}

namespace {

struct AdamState {
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
};

AdamState zero_like(const EncoderModel& model) {
  AdamState s;
  for (const auto& l : model.layers()) {
    DenseLayer z{Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())};
    s.m.push_back(z);
    s.v.push_back(z);
  }
  return s;
}

template <typename Param>
void adam_update(Param& p, const Param& g, Param& m, Param& v, double lr, double c1, double c2) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  m = beta1 * m + (1.0 - beta1) * g;
  v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
  p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

}  // namespace

EmbeddingTable encode_table(const EncoderModel& model, const EmbeddingTable& original,
                            std::span<const std::string> tokens, Normalization normalization) {
  Matrix inputs(static_cast<Eigen::Index>(original.dimension()),
                static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    inputs.col(static_cast<Eigen::Index>(i)) = original.at(tokens[i]);
  }
  const Matrix outputs = model.forward(inputs);
  EmbeddingTable reduced(model.output_dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    Vector v = outputs.col(static_cast<Eigen::Index>(i));
    if (normalization == Normalization::PostHocUnit) {
      const double norm = v.norm();
      if (norm == 0.0) throw NumericError("cannot unit-normalise zero vector for '" + tokens[i] + "'");
      v /= norm;
    }
    reduced.add(tokens[i], std::move(v));
  }
  return reduced;
}

TrainResult train_encoder(const EmbeddingTable& original, const Vocabulary& vocab,
                          const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const std::vector<std::string> tokens = flatten_tokens(vocab);
  if (tokens.size() < 2) throw DataError("training needs at least two vocabulary tokens");

  std::vector<Vector> originals;
  originals.reserve(tokens.size());
  Matrix inputs(static_cast<Eigen::Index>(original.dimension()),
                static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Vector* v = original.find(tokens[i]);
    if (!v) throw DataError("vocabulary token '" + tokens[i] + "' not in embedding table");
    originals.push_back(*v);
    inputs.col(static_cast<Eigen::Index>(i)) = *v;
  }
  const Matrix target = cosine_matrix(originals);

  std::vector<std::size_t> dims{original.dimension()};
  dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
  dims.push_back(cfg.output_dim);
  EncoderModel model = EncoderModel::he_uniform(dims, derive_seed(cfg.seed, "encoder.init"));

  // Ring Loss only shapes the lengths in ring_loss mode; the other modes are
  // the unnormalised and post-hoc-normalised ablations.
  const double ring_weight =
      cfg.normalization == Normalization::RingLoss ? cfg.ring_loss_weight : 0.0;

  TrainReport report;
  AdamState adam = zero_like(model);
  EncoderModel grad;
  std::vector<double> best_so_far;
  double beta1_t = 1.0;
  double beta2_t = 1.0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const ObjectiveTerms terms =
        evaluate_objective(model, inputs, target, ring_weight, cfg.ring_radius, &grad);
    if (!std::isfinite(terms.total)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                         " (non-finite loss)");
    }
    EpochLoss record{epoch, terms.pair_loss, terms.ring_penalty, terms.total};
    report.history.push_back(record);
    if (on_epoch) on_epoch(record);
    best_so_far.push_back(best_so_far.empty() ? terms.total
                                              : std::min(best_so_far.back(), terms.total));

    beta1_t *= 0.9;
    beta2_t *= 0.999;
    auto& layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      adam_update(layers[l].weight, grad.layers()[l].weight, adam.m[l].weight, adam.v[l].weight,
                  cfg.learning_rate, 1.0 - beta1_t, 1.0 - beta2_t);
      adam_update(layers[l].bias, grad.layers()[l].bias, adam.m[l].bias, adam.v[l].bias,
                  cfg.learning_rate, 1.0 - beta1_t, 1.0 - beta2_t);
    }

    const std::size_t window = cfg.early_stop_window;
    if (window > 0 && best_so_far.size() > window) {
      const double before = best_so_far[best_so_far.size() - 1 - window];
      if (before - best_so_far.back() < cfg.early_stop_delta) {
        report.early_stopped = true;
        log()->info("early stop at epoch {} (loss {:.6g})", epoch, terms.total);
        break;
      }
    }
  }

  const ObjectiveTerms final_terms =
      evaluate_objective(model, inputs, target, ring_weight, cfg.ring_radius);
  if (!std::isfinite(final_terms.total)) throw NumericError("training ended with non-finite loss");
  report.final_pair_loss = final_terms.pair_loss;
  report.final_ring_penalty = final_terms.ring_penalty;

  EmbeddingTable reduced = encode_table(model, original, tokens, cfg.normalization);
  return {std::move(model), std::move(reduced), std::move(report)};
}

}  // namespace semvol
