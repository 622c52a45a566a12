#pragma once

#include "semvol/encoder.hpp"
#include "semvol/volume.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace semvol {

/// Tensor container layout (all integers little-endian):
///
///   offset  size     field
///   0       4        magic "SVOL"
///   4       2        format version (u16, currently 1)
///   6       1        dtype code (1 = f32, 2 = f64)
///   7       1        rank (u8)
///   8       8*rank   shape, one u64 per dimension
///   ...     n*size   payload, row-major
///
/// In numpy: np.frombuffer(buf, dtype="<f4" or "<f8", offset=8 + 8 * rank)
/// .reshape(shape).
enum class DType : std::uint8_t { F32 = 1, F64 = 2 };

inline constexpr std::uint16_t kTensorVersion = 1;

struct Tensor {
  std::vector<std::uint64_t> shape;
  DType dtype = DType::F64;
  std::vector<double> data;
};

/// Throws DataError on non-finite data, rank > 255, a shape/data mismatch or
/// an element count overflow. f32 narrowing rounds to nearest even.
void write_tensor(std::ostream& out, std::span<const std::uint64_t> shape,
                  std::span<const double> data, DType dtype);
void write_tensor(std::ostream& out, const Volume& volume, DType dtype = DType::F32);
std::string tensor_bytes(const Volume& volume, DType dtype = DType::F32);

/// Throws DataError with "bad magic", "unsupported version", "bad dtype" or
/// "truncated".
Tensor read_tensor(std::istream& in);
Tensor read_tensor(std::string_view bytes);
/// Requires a rank-4 container.
Volume read_volume(std::istream& in);
Volume read_volume(std::string_view bytes);

void save_volume(const std::filesystem::path& path, const Volume& volume,
                 DType dtype = DType::F32);
Volume load_volume(const std::filesystem::path& path);

/// Checkpoint: magic "SVCK", u16 version, u32-length key=value config text
/// (layer_dims, seed, training settings), u32 tensor count, then for each
/// parameter a u16-length name followed by an f64 tensor container.
struct Checkpoint {
  EncoderModel model;
  TrainConfig config;
};

void write_checkpoint(std::ostream& out, const EncoderModel& model, const TrainConfig& config);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const EncoderModel& model,
                     const TrainConfig& config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// "term,<t1>,...,<tn>" header, then one row per term, six decimals.
std::string export_similarity_csv(const Matrix& matrix, std::span<const std::string> terms);

/// "epoch,pair_loss,ring_penalty,total" rows.
void write_training_log(std::ostream& out, const TrainReport& report);

}  // namespace semvol
