#include "semvol/volume.hpp"

#include "semvol/error.hpp"
#include "semvol/random.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>

namespace semvol {

std::string_view to_string(VolumeMode v) {
  return v == VolumeMode::OneHot ? "onehot" : "semantic";
}

std::string_view to_string(Aggregation v) {
  switch (v) {
    case Aggregation::Addition: return "addition";
    case Aggregation::NormalizedSum: return "normalized_sum";
    case Aggregation::WeightedNorm: return "weighted_norm";
  }
  return "?";
}

std::string_view to_string(InstanceCombine v) {
  return v == InstanceCombine::Sum ? "sum" : "max";
}

VolumeMode parse_volume_mode(std::string_view text) {
  if (text == "onehot") return VolumeMode::OneHot;
  if (text == "semantic") return VolumeMode::Semantic;
  throw DataError("unknown volume mode '" + std::string(text) + "'");
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "addition") return Aggregation::Addition;
  if (text == "normalized_sum") return Aggregation::NormalizedSum;
  if (text == "weighted_norm") return Aggregation::WeightedNorm;
  throw DataError("unknown aggregation '" + std::string(text) + "'");
}

InstanceCombine parse_instance_combine(std::string_view text) {
  if (text == "sum") return InstanceCombine::Sum;
  if (text == "max") return InstanceCombine::Max;
  throw DataError("unknown instance combination '" + std::string(text) + "'");
}

void VolumeConfig::validate() const {
  if (height < 1 || width < 1 || frames < 1) {
    throw DataError("volume height, width and frame count must be at least 1");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DataError("sigma must be positive");
  if (!(influence_epsilon >= 0.0) || !std::isfinite(influence_epsilon)) {
    throw DataError("influence epsilon must be non-negative");
  }
  if (!std::isfinite(score_threshold)) throw DataError("score threshold must be finite");
}

Volume::Volume(std::size_t channels, std::size_t frames, std::size_t height, std::size_t width)
    : shape_{channels, frames, height, width}, data_(channels * frames * height * width, 0.0) {}

double gaussian_weight(double x, double y, double cx, double cy, double sigma, double score) {
  const double dx = x - cx;
  const double dy = y - cy;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) * score;
}

Frame filter_keypoints(const Frame& frame, double threshold) {
  Frame out;
  std::copy_if(frame.begin(), frame.end(), std::back_inserter(out),
               [&](const Keypoint& k) { return k.score >= threshold; });
  return out;
}

std::vector<std::size_t> sample_indices(std::size_t length, std::size_t count,
                                        std::optional<std::uint64_t> seed) {
  if (length == 0) throw DataError("cannot sample frames from an empty sequence");
  std::vector<std::size_t> indices(count);
  if (!seed) {
    for (std::size_t k = 0; k < count; ++k) indices[k] = ((2 * k + 1) * length) / (2 * count);
    return indices;
  }
  Rng rng(*seed);
  const double step = static_cast<double>(length) / static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double pos = (static_cast<double>(k) + rng.uniform()) * step;
    indices[k] = std::min(static_cast<std::size_t>(pos), length - 1);
  }
  return indices;
}

KeypointSequence sample_frames(const KeypointSequence& sequence, std::size_t count,
                               std::optional<std::uint64_t> seed) {
  if (sequence.frames.empty()) throw DataError("cannot sample frames from an empty sequence");
  KeypointSequence out;
  out.meta = sequence.meta;
  out.frames.reserve(count);
  for (std::size_t i : sample_indices(sequence.frames.size(), count, seed)) {
    out.frames.push_back(sequence.frames[i]);
  }
  return out;
}

KeypointSequence rescale_to_grid(const KeypointSequence& sequence, std::size_t height,
                                 std::size_t width) {
  if (!(sequence.meta.width > 0.0) || !(sequence.meta.height > 0.0)) return sequence;
  KeypointSequence out = sequence;
  const double sx = static_cast<double>(width) / sequence.meta.width;
  const double sy = static_cast<double>(height) / sequence.meta.height;
  for (auto& frame : out.frames) {
    for (auto& k : frame) {
      k.x *= sx;
      k.y *= sy;
    }
  }
  out.meta.width = 0.0;
  out.meta.height = 0.0;
  return out;
}

KeypointSequence prepare_sequence(const KeypointSequence& sequence, const VolumeConfig& cfg,
                                  std::optional<std::uint64_t> seed) {
  cfg.validate();
  KeypointSequence filtered;
  filtered.meta = sequence.meta;
  for (const auto& frame : sequence.frames) {
    filtered.frames.push_back(filter_keypoints(frame, cfg.score_threshold));
  }
  return sample_frames(rescale_to_grid(filtered, cfg.height, cfg.width), cfg.frames, seed);
}

namespace {

/// Cells a keypoint can influence with kernel value >= epsilon.
struct CellBox {
  std::size_t x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // inclusive-exclusive
  bool empty() const { return x0 >= x1 || y0 >= y1; }
};

CellBox influence_box(const Keypoint& k, const VolumeConfig& cfg) {
  CellBox box{0, cfg.width, 0, cfg.height};
  const double eps = cfg.influence_epsilon;
  if (eps <= 0.0) return box;
  if (!(k.score >= eps)) return {};
  const double radius = std::sqrt(-2.0 * cfg.sigma * cfg.sigma * std::log(eps / k.score));
  // One cell of slack on each side; the exact test happens per cell.
  auto clip = [](double v, std::size_t hi) {
    if (v <= 0.0) return std::size_t{0};
    return std::min(static_cast<std::size_t>(v), hi);
  };
  box.x0 = clip(std::floor(k.x - radius) - 1.0, cfg.width);
  box.x1 = clip(std::ceil(k.x + radius) + 2.0, cfg.width);
  box.y0 = clip(std::floor(k.y - radius) - 1.0, cfg.height);
  box.y1 = clip(std::ceil(k.y + radius) + 2.0, cfg.height);
  return box;
}

void check_keypoint(const Keypoint& k) {
  if (!std::isfinite(k.x) || !std::isfinite(k.y)) {
    throw DataError("keypoint '" + k.name.display() + "' has non-finite coordinates");
  }
  if (!(k.score >= 0.0 && k.score <= 1.0)) {
    throw DataError("keypoint '" + k.name.display() + "' has score outside [0, 1]");
  }
}

}  // namespace

Volume build_onehot_volume(const KeypointSequence& sequence,
                           std::span<const CompoundTerm> classes, const VolumeConfig& cfg) {
  cfg.validate();
  std::map<std::string, std::size_t> channel_of;
  for (std::size_t c = 0; c < classes.size(); ++c) channel_of.emplace(classes[c].key(), c);

  std::set<std::string> unknown;
  for (const auto& frame : sequence.frames) {
    for (const auto& k : frame) {
      check_keypoint(k);
      if (!channel_of.contains(k.name.key())) unknown.insert(k.name.display());
    }
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "'" : ", '") + u + "'";
    throw DataError("keypoint names not in class list: " + list);
  }

  Volume volume(classes.size(), sequence.frames.size(), cfg.height, cfg.width);
  const double eps = cfg.influence_epsilon;
  for (std::size_t t = 0; t < sequence.frames.size(); ++t) {
    for (const auto& k : sequence.frames[t]) {
      const std::size_t c = channel_of.at(k.name.key());
      const CellBox box = influence_box(k, cfg);
      if (box.empty()) continue;
      for (std::size_t y = box.y0; y < box.y1; ++y) {
        for (std::size_t x = box.x0; x < box.x1; ++x) {
          const double g = gaussian_weight(static_cast<double>(x), static_cast<double>(y), k.x,
                                           k.y, cfg.sigma, k.score);
          if (!(g >= eps)) continue;
          double& cell = volume.at(c, t, y, x);
          cell = cfg.instance_combine == InstanceCombine::Sum ? cell + g : std::max(cell, g);
        }
      }
    }
  }
  return volume;
}

Volume build_semantic_volume(const KeypointSequence& sequence, const EmbeddingTable& table,
                             const VolumeConfig& cfg) {
  cfg.validate();
  std::map<std::string, Vector> vectors;
  std::set<std::string> unknown;
  for (const auto& frame : sequence.frames) {
    for (const auto& k : frame) {
      check_keypoint(k);
      const std::string key = k.name.key();
      if (vectors.contains(key) || unknown.contains(k.name.display())) continue;
      try {
        vectors.emplace(key, compose_compound(table, k.name));
      } catch (const DataError&) {
        unknown.insert(k.name.display());
      }
    }
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "'" : ", '") + u + "'";
    throw DataError("keypoint names not resolvable in embedding table: " + list);
  }

  const std::size_t dim = table.dimension();
  const std::size_t cells = cfg.height * cfg.width;
  Volume volume(dim, sequence.frames.size(), cfg.height, cfg.width);
  const double eps = cfg.influence_epsilon;
  std::vector<double> count(cells);
  std::vector<double> weight_sum(cells);
  for (std::size_t t = 0; t < sequence.frames.size(); ++t) {
    std::fill(count.begin(), count.end(), 0.0);
    std::fill(weight_sum.begin(), weight_sum.end(), 0.0);
    for (const auto& k : sequence.frames[t]) {
      const Vector& v = vectors.at(k.name.key());
      const CellBox box = influence_box(k, cfg);
      if (box.empty()) continue;
      for (std::size_t y = box.y0; y < box.y1; ++y) {
        for (std::size_t x = box.x0; x < box.x1; ++x) {
          const double g = gaussian_weight(static_cast<double>(x), static_cast<double>(y), k.x,
                                           k.y, cfg.sigma, k.score);
          if (!(g >= eps)) continue;
          for (std::size_t c = 0; c < dim; ++c) {
            volume.at(c, t, y, x) += g * v[static_cast<Eigen::Index>(c)];
          }
          count[y * cfg.width + x] += 1.0;
          weight_sum[y * cfg.width + x] += g;
        }
      }
    }
    if (cfg.aggregation == Aggregation::Addition) continue;
    for (std::size_t y = 0; y < cfg.height; ++y) {
      for (std::size_t x = 0; x < cfg.width; ++x) {
        const std::size_t cell = y * cfg.width + x;
        double divisor = 1.0;
        if (cfg.aggregation == Aggregation::NormalizedSum) {
          divisor = std::max(1.0, count[cell]);
        } else if (weight_sum[cell] > 0.0 && weight_sum[cell] >= eps) {
          divisor = weight_sum[cell];
        } else {
          for (std::size_t c = 0; c < dim; ++c) volume.at(c, t, y, x) = 0.0;
          continue;
        }
        if (divisor == 1.0) continue;
        for (std::size_t c = 0; c < dim; ++c) volume.at(c, t, y, x) /= divisor;
      }
    }
  }
  return volume;
}

KeypointSequence read_keypoints_jsonl(std::istream& in) {
  using nlohmann::json;
  KeypointSequence sequence;
  std::map<std::size_t, Frame> frames;
  std::size_t declared_frames = 0;
  bool seen_meta = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "keypoints line " + std::to_string(line_no) + ": ";
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + "invalid JSON (" + e.what() + ")");
    }
    if (!record.is_object()) throw DataError(where + "expected a JSON object");
    try {
      if (record.contains("meta")) {
        if (seen_meta) throw DataError(where + "duplicate meta header");
        seen_meta = true;
        const json& meta = record.at("meta");
        sequence.meta.width = meta.value("width", 0.0);
        sequence.meta.height = meta.value("height", 0.0);
        sequence.meta.skeleton = meta.value("skeleton", std::string{});
        declared_frames = meta.value("frames", std::size_t{0});
        continue;
      }
      const auto frame = record.at("frame").get<long long>();
      if (frame < 0) throw DataError(where + "negative frame index");
      Keypoint k;
      k.name = CompoundTerm::parse(record.at("name").get<std::string>());
      k.x = record.at("x").get<double>();
      k.y = record.at("y").get<double>();
      k.score = record.value("score", 1.0);
      const std::string kind = record.value("kind", std::string{"joint"});
      if (kind == "joint") {
        k.kind = KeypointKind::Joint;
      } else if (kind == "object") {
        k.kind = KeypointKind::Object;
      } else {
        throw DataError(where + "unknown kind '" + kind + "'");
      }
      check_keypoint(k);
      frames[static_cast<std::size_t>(frame)].push_back(std::move(k));
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    }
  }
  std::size_t frame_count = frames.empty() ? 0 : frames.rbegin()->first + 1;
  frame_count = std::max(frame_count, declared_frames);
  sequence.frames.resize(frame_count);
  for (auto& [index, frame] : frames) sequence.frames[index] = std::move(frame);
  return sequence;
}

KeypointSequence load_keypoints_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open keypoint file " + path.string());
  return read_keypoints_jsonl(in);
}

}  // namespace semvol
