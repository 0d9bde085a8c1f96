#pragma once

#include <cstdint>

namespace stitchkit {

// Counter-based deterministic generator (splitmix64 core). All randomness in
// the project flows through this so that results are bit-identical across
// platforms and standard-library versions. Streams derived from the same seed
// are independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    state_ = mix(seed + 0x9e3779b97f4a7c15ULL * (stream + 1));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

  // Independent child stream, e.g. one per sample index.
  Rng split(std::uint64_t stream) const {
    Rng r(state_, stream);
    return r;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
};

}  // namespace stitchkit
