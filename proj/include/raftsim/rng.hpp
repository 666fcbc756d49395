#pragma once

#include <cstdint>
#include <random>

namespace raftsim {

// Deterministic noise source.  std::mt19937_64 has a fully specified output
// sequence, and the 53-bit mapping below is fixed arithmetic, so a given
// (seed, stream) pair reproduces the same doubles on every platform.
// Distinct streams decorrelate the generators by mixing the stream id into
// the seed with a 64-bit odd multiplier.
class NoiseRng {
 public:
  explicit NoiseRng(std::uint64_t seed, std::uint64_t stream = 0)
      : gen_(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1))) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [-1, 1).
  double uniform_pm1() { return 2.0 * uniform01() - 1.0; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace raftsim
