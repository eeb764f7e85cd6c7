#pragma once

#include <cstdint>
#include <random>

namespace kherd {

// splitmix64 finalizer, used to turn related seeds into unrelated streams.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded generator with substream derivation. Identical seed gives an
// identical stream of draws on the same build. Derivation depends only on
// the stored seed, never on how many draws were taken, so modules can split
// off independent generators without coupling their consumption.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed)) {}

  std::uint64_t seed() const { return seed_; }

  Rng derive(std::uint64_t stream) const {
    return Rng(mix_seed(seed_ ^ mix_seed(stream ^ 0x517cc1b727220a95ULL)));
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double normal() { return normal_(engine_); }

  std::uint64_t next_u64() { return engine_(); }

  // Inclusive bounds.
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{};
};

}  // namespace kherd
