#include "semvol/io_formats.hpp"

#include "semvol/error.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace semvol {

namespace {

constexpr char kTensorMagic[4] = {'S', 'V', 'O', 'L'};
constexpr char kCheckpointMagic[4] = {'S', 'V', 'C', 'K'};
constexpr std::uint16_t kCheckpointVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  }
  out.write(bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw DataError("truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

std::size_t dtype_size(DType dtype) { return dtype == DType::F32 ? 4 : 8; }

std::uint64_t checked_product(std::span<const std::uint64_t> shape) {
  std::uint64_t count = 1;
  for (std::uint64_t d : shape) {
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / d) {
      throw DataError("tensor shape product overflows");
    }
    count *= d;
  }
  return count;
}

}  // namespace

void write_tensor(std::ostream& out, std::span<const std::uint64_t> shape,
                  std::span<const double> data, DType dtype) {
  if (dtype != DType::F32 && dtype != DType::F64) throw DataError("bad dtype");
  if (shape.size() > 255) throw DataError("tensor rank exceeds 255");
  const std::uint64_t count = checked_product(shape);
  if (count > std::numeric_limits<std::uint64_t>::max() / dtype_size(dtype)) {
    throw DataError("tensor payload size overflows");
  }
  if (count != data.size()) {
    throw DataError("tensor shape holds " + std::to_string(count) + " elements but data has " +
                    std::to_string(data.size()));
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw DataError("tensor contains non-finite data");
  }

  out.write(kTensorMagic, 4);
  put_le<std::uint16_t>(out, kTensorVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(shape.size()));
  for (std::uint64_t d : shape) put_le<std::uint64_t>(out, d);
  if (dtype == DType::F32) {
    for (double v : data) {
      const float f = static_cast<float>(v);
      if (!std::isfinite(f)) throw DataError("tensor value overflows f32");
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
    }
  } else {
    for (double v : data) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw DataError("failed writing tensor");
}

void write_tensor(std::ostream& out, const Volume& volume, DType dtype) {
  const auto s = volume.shape();
  const std::uint64_t shape[4] = {s[0], s[1], s[2], s[3]};
  write_tensor(out, shape, volume.data(), dtype);
}

std::string tensor_bytes(const Volume& volume, DType dtype) {
  std::ostringstream out(std::ios::binary);
  write_tensor(out, volume, dtype);
  return std::move(out).str();
}

Tensor read_tensor(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw DataError("truncated");
  if (std::memcmp(magic, kTensorMagic, 4) != 0) throw DataError("bad magic");
  const auto version = get_le<std::uint16_t>(in);
  if (version != kTensorVersion) {
    throw DataError("unsupported version " + std::to_string(version));
  }
  const auto code = get_le<std::uint8_t>(in);
  if (code != 1 && code != 2) throw DataError("bad dtype code " + std::to_string(code));
  Tensor tensor;
  tensor.dtype = static_cast<DType>(code);
  const auto rank = get_le<std::uint8_t>(in);
  tensor.shape.resize(rank);
  for (auto& d : tensor.shape) d = get_le<std::uint64_t>(in);
  const std::uint64_t count = checked_product(tensor.shape);
  const std::size_t size = dtype_size(tensor.dtype);
  if (count > std::numeric_limits<std::uint64_t>::max() / size) {
    throw DataError("tensor payload size overflows");
  }

  // Read in chunks so a corrupt shape cannot trigger a huge allocation before
  // the payload is known to exist.
  constexpr std::uint64_t chunk = 1 << 16;
  std::vector<unsigned char> bytes;
  for (std::uint64_t done = 0; done < count;) {
    const std::uint64_t n = std::min(chunk, count - done);
    bytes.resize(static_cast<std::size_t>(n * size));
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
      throw DataError("truncated");
    }
    for (std::uint64_t i = 0; i < n; ++i) {
      const unsigned char* p = bytes.data() + i * size;
      if (tensor.dtype == DType::F32) {
        std::uint32_t bits = 0;
        for (std::size_t b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[b]) << (8 * b);
        tensor.data.push_back(static_cast<double>(std::bit_cast<float>(bits)));
      } else {
        std::uint64_t bits = 0;
        for (std::size_t b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
        tensor.data.push_back(std::bit_cast<double>(bits));
      }
    }
    done += n;
  }
  return tensor;
}

Tensor read_tensor(std::string_view bytes) {
  std::istringstream in(std::string(bytes), std::ios::binary);
  return read_tensor(in);
}

namespace {

Volume to_volume(const Tensor& tensor) {
  if (tensor.shape.size() != 4) {
    throw DataError("expected a rank-4 volume, got rank " + std::to_string(tensor.shape.size()));
  }
  Volume volume(tensor.shape[0], tensor.shape[1], tensor.shape[2], tensor.shape[3]);
  std::copy(tensor.data.begin(), tensor.data.end(), volume.data().begin());
  return volume;
}

}  // namespace

Volume read_volume(std::istream& in) { return to_volume(read_tensor(in)); }
Volume read_volume(std::string_view bytes) { return to_volume(read_tensor(bytes)); }

void save_volume(const std::filesystem::path& path, const Volume& volume, DType dtype) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write volume " + path.string());
  write_tensor(out, volume, dtype);
}

Volume load_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open volume " + path.string());
  return read_volume(in);
}

namespace {

std::string shortest(double v) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
  return std::string(buffer, ptr);
}

std::string join_sizes(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<std::size_t> split_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                           : comma - start);
    if (!part.empty()) {
      std::size_t v = 0;
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc() || p != part.data() + part.size()) {
        throw DataError("checkpoint: bad integer list '" + text + "'");
      }
      out.push_back(v);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_value(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw DataError("checkpoint: missing config key '" + key + "'");
  T v{};
  const std::string& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw DataError("checkpoint: bad value for '" + key + "'");
  }
  return v;
}

void write_tensor_f64(std::ostream& out, const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  const std::uint64_t shape[2] = {static_cast<std::uint64_t>(m.rows()),
                                  static_cast<std::uint64_t>(m.cols())};
  write_tensor(out, shape, data, DType::F64);
}

void write_tensor_f64(std::ostream& out, const Vector& v) {
  const std::uint64_t shape[1] = {static_cast<std::uint64_t>(v.size())};
  write_tensor(out, shape, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
               DType::F64);
}

void put_string(std::ostream& out, const std::string& s) {
  if (s.size() > 0xffff) throw DataError("checkpoint name too long");
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, std::size_t length) {
  std::string s(length, '\0');
  if (length && !in.read(s.data(), static_cast<std::streamsize>(length))) throw DataError("truncated");
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const EncoderModel& model, const TrainConfig& config) {
  if (!model.all_finite()) throw DataError("refusing to checkpoint non-finite parameters");
  std::ostringstream text;
  text << "layer_dims=" << join_sizes(model.layer_dims()) << '\n'
       << "output_dim=" << config.output_dim << '\n'
       << "hidden_dims=" << join_sizes(config.hidden_dims) << '\n'
       << "ring_loss_weight=" << shortest(config.ring_loss_weight) << '\n'
       << "ring_radius=" << shortest(config.ring_radius) << '\n'
       << "learning_rate=" << shortest(config.learning_rate) << '\n'
       << "epochs=" << config.epochs << '\n'
       << "seed=" << config.seed << '\n'
       << "normalization=" << to_string(config.normalization) << '\n'
       << "early_stop_window=" << config.early_stop_window << '\n'
       << "early_stop_delta=" << shortest(config.early_stop_delta) << '\n';
  const std::string config_text = text.str();

  out.write(kCheckpointMagic, 4);
  put_le<std::uint16_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(config_text.size()));
  out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(2 * model.layers().size()));
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    put_string(out, "layer" + std::to_string(l) + ".weight");
    write_tensor_f64(out, model.layers()[l].weight);
    put_string(out, "layer" + std::to_string(l) + ".bias");
    write_tensor_f64(out, model.layers()[l].bias);
  }
  if (!out) throw DataError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw DataError("truncated");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw DataError("bad magic");
  const auto version = get_le<std::uint16_t>(in);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported version " + std::to_string(version));
  }
  const std::string config_text = get_string(in, get_le<std::uint32_t>(in));
  std::map<std::string, std::string> kv;
  std::istringstream lines(config_text);
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("checkpoint: malformed config line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }

  Checkpoint ckpt;
  TrainConfig& cfg = ckpt.config;
  cfg.output_dim = parse_value<std::size_t>(kv, "output_dim");
  cfg.hidden_dims = split_sizes(kv.count("hidden_dims") ? kv.at("hidden_dims") : "");
  cfg.ring_loss_weight = parse_value<double>(kv, "ring_loss_weight");
  cfg.ring_radius = parse_value<double>(kv, "ring_radius");
  cfg.learning_rate = parse_value<double>(kv, "learning_rate");
  cfg.epochs = parse_value<std::size_t>(kv, "epochs");
  cfg.seed = parse_value<std::uint64_t>(kv, "seed");
  if (!kv.count("normalization")) throw DataError("checkpoint: missing config key 'normalization'");
  cfg.normalization = parse_normalization(kv.at("normalization"));
  cfg.early_stop_window = parse_value<std::size_t>(kv, "early_stop_window");
  cfg.early_stop_delta = parse_value<double>(kv, "early_stop_delta");
  if (!kv.count("layer_dims")) throw DataError("checkpoint: missing config key 'layer_dims'");

  ckpt.model = EncoderModel(split_sizes(kv.at("layer_dims")));
  auto& layers = ckpt.model.layers();
  const auto count = get_le<std::uint32_t>(in);
  if (count != 2 * layers.size()) throw DataError("checkpoint: parameter count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (int part = 0; part < 2; ++part) {
      const std::string name = get_string(in, get_le<std::uint16_t>(in));
      const std::string expected =
          "layer" + std::to_string(l) + (part == 0 ? ".weight" : ".bias");
      if (name != expected) throw DataError("checkpoint: expected '" + expected + "', got '" + name + "'");
      const Tensor t = read_tensor(in);
      if (t.dtype != DType::F64) throw DataError("checkpoint: parameters must be f64");
      if (part == 0) {
        Matrix& w = layers[l].weight;
        if (t.shape.size() != 2 || t.shape[0] != static_cast<std::uint64_t>(w.rows()) ||
            t.shape[1] != static_cast<std::uint64_t>(w.cols())) {
          throw DataError("checkpoint: shape mismatch for " + name);
        }
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
          for (Eigen::Index c = 0; c < w.cols(); ++c) {
            w(r, c) = t.data[static_cast<std::size_t>(r * w.cols() + c)];
          }
        }
      } else {
        Vector& b = layers[l].bias;
        if (t.shape.size() != 1 || t.shape[0] != static_cast<std::uint64_t>(b.size())) {
          throw DataError("checkpoint: shape mismatch for " + name);
        }
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = t.data[static_cast<std::size_t>(i)];
      }
    }
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const EncoderModel& model,
                     const TrainConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  write_checkpoint(out, model, config);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

std::string export_similarity_csv(const Matrix& matrix, std::span<const std::string> terms) {
  if (matrix.rows() != matrix.cols()) throw DataError("similarity matrix must be square");
  if (static_cast<std::size_t>(matrix.rows()) != terms.size()) {
    throw DataError("similarity matrix has " + std::to_string(matrix.rows()) + " rows but " +
                    std::to_string(terms.size()) + " labels");
  }
  std::string out = "term";
  for (const auto& t : terms) out += "," + t;
  out += '\n';
  char buffer[64];
  for (std::size_t i = 0; i < terms.size(); ++i) {
    out += terms[i];
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const double v = matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, v,
                                     std::chars_format::fixed, 6);
      std::string cell(buffer, ptr);
      if (cell == "-0.000000") cell = "0.000000";
      out += "," + cell;
    }
    out += '\n';
  }
  return out;
}

void write_training_log(std::ostream& out, const TrainReport& report) {
  out << "epoch,pair_loss,ring_penalty,total\n";
  for (const auto& e : report.history) {
    out << e.epoch << ',' << shortest(e.pair_loss) << ',' << shortest(e.ring_penalty) << ','
        << shortest(e.total) << '\n';
  }
}

}  // namespace semvol
