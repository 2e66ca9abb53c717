#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace netdyn {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic generator for sample `index` of a run seeded with `seed`;
/// streams do not depend on scheduling.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t index = 0)
      : engine_(splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL))) {}

  /// Uniform in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace netdyn
