#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace semvol {

// std::*_distribution output is implementation-defined, so every transform
// from engine bits to reals lives here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n), rejection sampled.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent seed for a named stream from the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

}  // namespace semvol
