#pragma once

#include <cstdint>
#include <random>

namespace hyclf {

/// Deterministic RNG wrapper. std::mt19937_64 has a mandated algorithm, and
/// the helpers below avoid std::uniform_real_distribution (whose output is
/// implementation-defined), so streams are reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 mantissa bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t next_u64() { return engine_(); }

  /// Derive an independent child stream (for per-run isolation in sweeps).
  Rng split(std::uint64_t salt) {
    return Rng(engine_() ^ (salt * 0x9e3779b97f4a7c15ULL));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hyclf
