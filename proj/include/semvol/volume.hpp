#pragma once

#include "semvol/embeddings.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semvol {

enum class KeypointKind { Joint, Object };

struct Keypoint {
  CompoundTerm name;
  double x = 0.0;  // column, grid or source units
  double y = 0.0;  // row
  double score = 1.0;
  KeypointKind kind = KeypointKind::Joint;
};

using Frame = std::vector<Keypoint>;

struct SequenceMeta {
  double width = 0.0;  // source resolution; 0 means already in grid units
  double height = 0.0;
  std::string skeleton;
};

struct KeypointSequence {
  std::vector<Frame> frames;
  SequenceMeta meta;
};

enum class VolumeMode { OneHot, Semantic };
enum class Aggregation { Addition, NormalizedSum, WeightedNorm };
enum class InstanceCombine { Sum, Max };

std::string_view to_string(VolumeMode v);
std::string_view to_string(Aggregation v);
std::string_view to_string(InstanceCombine v);
VolumeMode parse_volume_mode(std::string_view text);
Aggregation parse_aggregation(std::string_view text);
InstanceCombine parse_instance_combine(std::string_view text);

struct VolumeConfig {
  std::size_t height = 56;
  std::size_t width = 56;
  std::size_t frames = 48;
  double sigma = 0.6;
  double score_threshold = 0.1;
  /// Kernel values below this are treated as no influence; 0 renders exactly.
  double influence_epsilon = 1e-4;
  VolumeMode mode = VolumeMode::Semantic;
  Aggregation aggregation = Aggregation::Addition;
  InstanceCombine instance_combine = InstanceCombine::Max;

  void validate() const;
};

/// Dense C x T x H x W tensor, channel-major then time-major.
class Volume {
 public:
  Volume() = default;
  Volume(std::size_t channels, std::size_t frames, std::size_t height, std::size_t width);

  std::size_t channels() const { return shape_[0]; }
  std::size_t frames() const { return shape_[1]; }
  std::size_t height() const { return shape_[2]; }
  std::size_t width() const { return shape_[3]; }
  std::array<std::size_t, 4> shape() const { return shape_; }

  std::size_t index(std::size_t c, std::size_t t, std::size_t y, std::size_t x) const {
    return ((c * shape_[1] + t) * shape_[2] + y) * shape_[3] + x;
  }
  double& at(std::size_t c, std::size_t t, std::size_t y, std::size_t x) {
    return data_[index(c, t, y, x)];
  }
  double at(std::size_t c, std::size_t t, std::size_t y, std::size_t x) const {
    return data_[index(c, t, y, x)];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  std::array<std::size_t, 4> shape_{0, 0, 0, 0};
  std::vector<double> data_;
};

/// exp(-((x-cx)^2 + (y-cy)^2) / (2 sigma^2)) * score
double gaussian_weight(double x, double y, double cx, double cy, double sigma,
                       double score);

/// Keeps keypoints with score >= threshold.
Frame filter_keypoints(const Frame& frame, double threshold);

/// Source frame index for each of `count` output frames. The input is split
/// into `count` equal intervals; without a seed each interval contributes its
/// midpoint, with a seed a uniformly jittered position inside it.
std::vector<std::size_t> sample_indices(std::size_t length, std::size_t count,
                                        std::optional<std::uint64_t> seed);

/// Throws DataError on an empty sequence.
KeypointSequence sample_frames(const KeypointSequence& sequence, std::size_t count,
                               std::optional<std::uint64_t> seed);

/// Rescales source-resolution coordinates into [0, width) x [0, height). A
/// sequence with no source resolution is returned unchanged.
KeypointSequence rescale_to_grid(const KeypointSequence& sequence, std::size_t height,
                                 std::size_t width);

/// Filter, rescale and resample a raw sequence ready for rendering.
KeypointSequence prepare_sequence(const KeypointSequence& sequence, const VolumeConfig& cfg,
                                  std::optional<std::uint64_t> seed);

/// One channel per class; every frame of `sequence` becomes one time slice.
/// Throws DataError for a keypoint whose name is not in `classes`.
Volume build_onehot_volume(const KeypointSequence& sequence,
                           std::span<const CompoundTerm> classes, const VolumeConfig& cfg);

/// D channels holding Gaussian-weighted word vectors, combined per
/// cfg.aggregation. Throws DataError for an unresolvable keypoint name.
Volume build_semantic_volume(const KeypointSequence& sequence, const EmbeddingTable& table,
                             const VolumeConfig& cfg);

/// Header line {"meta": {...}} followed by one keypoint object per line.
KeypointSequence read_keypoints_jsonl(std::istream& in);
KeypointSequence load_keypoints_jsonl(const std::filesystem::path& path);

}  // namespace semvol
