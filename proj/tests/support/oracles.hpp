#pragma once

// Test-only reference implementations. Nothing here calls into the code paths
// they check beyond plain data types.

#include "semvol/embeddings.hpp"
#include "semvol/encoder.hpp"
#include "semvol/random.hpp"
#include "semvol/volume.hpp"

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace semvol::testing {

/// Straight per-cell evaluation of the Gaussian kernel, no truncation box.
inline double kernel(double x, double y, const Keypoint& k, double sigma) {
  const double d2 = (x - k.x) * (x - k.x) + (y - k.y) * (y - k.y);
  return std::exp(-d2 / (2.0 * sigma * sigma)) * k.score;
}

/// Visits every cell and every keypoint; the definition of the volumes.
inline Volume naive_semantic(const KeypointSequence& seq,
                             const std::map<std::string, Vector>& vectors, std::size_t dim,
                             const VolumeConfig& cfg) {
  Volume v(dim, seq.frames.size(), cfg.height, cfg.width);
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    for (std::size_t y = 0; y < cfg.height; ++y) {
      for (std::size_t x = 0; x < cfg.width; ++x) {
        std::vector<double> acc(dim, 0.0);
        double count = 0.0;
        double wsum = 0.0;
        for (const auto& k : seq.frames[t]) {
          const double g = kernel(static_cast<double>(x), static_cast<double>(y), k, cfg.sigma);
          if (!(g >= cfg.influence_epsilon)) continue;
          const Vector& w = vectors.at(k.name.key());
          for (std::size_t c = 0; c < dim; ++c) acc[c] += g * w[static_cast<Eigen::Index>(c)];
          count += 1.0;
          wsum += g;
        }
        for (std::size_t c = 0; c < dim; ++c) {
          double value = acc[c];
          switch (cfg.aggregation) {
            case Aggregation::Addition: break;
            case Aggregation::NormalizedSum: value /= std::max(1.0, count); break;
            case Aggregation::WeightedNorm:
              value = (wsum > 0.0 && wsum >= cfg.influence_epsilon) ? value / wsum : 0.0;
              break;
          }
          v.at(c, t, y, x) = value;
        }
      }
    }
  }
  return v;
}

inline Volume naive_onehot(const KeypointSequence& seq, std::span<const CompoundTerm> classes,
                           const VolumeConfig& cfg) {
  Volume v(classes.size(), seq.frames.size(), cfg.height, cfg.width);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
      for (std::size_t y = 0; y < cfg.height; ++y) {
        for (std::size_t x = 0; x < cfg.width; ++x) {
          double value = 0.0;
          for (const auto& k : seq.frames[t]) {
            if (k.name.key() != classes[c].key()) continue;
            const double g = kernel(static_cast<double>(x), static_cast<double>(y), k, cfg.sigma);
            if (!(g >= cfg.influence_epsilon)) continue;
            value = cfg.instance_combine == InstanceCombine::Sum ? value + g : std::max(value, g);
          }
          v.at(c, t, y, x) = value;
        }
      }
    }
  }
  return v;
}

/// Random frame set on a small grid; names drawn from `names`.
inline KeypointSequence random_sequence(Rng& rng, std::span<const CompoundTerm> names,
                                        std::size_t frames, std::size_t max_keypoints,
                                        std::size_t height, std::size_t width) {
  KeypointSequence seq;
  for (std::size_t t = 0; t < frames; ++t) {
    Frame f;
    const std::size_t n = rng.below(max_keypoints + 1);
    for (std::size_t i = 0; i < n; ++i) {
      Keypoint k;
      k.name = names[rng.below(names.size())];
      k.x = rng.uniform(0.0, static_cast<double>(width));
      k.y = rng.uniform(0.0, static_cast<double>(height));
      k.score = rng.uniform(0.05, 1.0);
      f.push_back(k);
    }
    seq.frames.push_back(f);
  }
  return seq;
}

inline double max_abs_diff(const Volume& a, const Volume& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

/// Training objective rebuilt from the forward pass and plain cosine
/// arithmetic, independent of the backprop code path.
inline double reference_objective(const EncoderModel& model, const Matrix& inputs,
                                  const Matrix& target, double ring_weight, double radius) {
  const Matrix out = model.forward(inputs);
  const Eigen::Index n = out.cols();
  double pair = 0.0;
  double ring = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ni = out.col(i).norm();
    ring += (ni - radius) * (ni - radius);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = out.col(i).dot(out.col(j)) / (ni * out.col(j).norm());
      pair += (c - target(i, j)) * (c - target(i, j));
    }
  }
  pair /= 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  ring /= static_cast<double>(n);
  return pair + ring_weight * ring;
}

/// Central finite difference of the objective with respect to one parameter.
struct ParameterRef {
  std::size_t layer;
  bool is_bias;
  Eigen::Index row;
  Eigen::Index col;
};

inline double& parameter(EncoderModel& m, const ParameterRef& p) {
  auto& l = m.layers()[p.layer];
  return p.is_bias ? l.bias[p.row] : l.weight(p.row, p.col);
}

inline double central_difference(const EncoderModel& model, const ParameterRef& p,
                                 const Matrix& inputs, const Matrix& target, double ring_weight,
                                 double radius, double step) {
  EncoderModel plus = model;
  EncoderModel minus = model;
  parameter(plus, p) += step;
  parameter(minus, p) -= step;
  const double fp = reference_objective(plus, inputs, target, ring_weight, radius);
  const double fm = reference_objective(minus, inputs, target, ring_weight, radius);
  return (fp - fm) / (2.0 * step);
}

inline Vector random_vector(Rng& rng, std::size_t dim, double scale = 1.0) {
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace semvol::testing
