#pragma once

// Seedable, splittable generator. Bounded draws use rejection sampling on the
// raw 64-bit stream, so a seed reproduces the same choices on every platform.

#include <cstdint>
#include <random>
#include <span>
#include <limits>
#include <stdexcept>

namespace pclab {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the i-th independent task under a base seed. Counter-derived, so
// the result never depends on how tasks are scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
  return splitmix64(splitmix64(base) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = engine_(); while (x >= limit);
    return x % bound;
  }

  // Index i with probability weights[i] / sum(weights), by integer cumulative sums.
  std::size_t pick(std::span<const std::uint64_t> weights) {
    std::uint64_t total = 0;
    for (auto w : weights) total += w;
    if (total == 0) throw std::invalid_argument("Rng::pick: all weights are zero");
    std::uint64_t u = below(total);
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (u < weights[i]) return i;
      u -= weights[i];
    }
    return weights.size() - 1;  // unreachable
  }

  Rng split(std::uint64_t stream) { return Rng(derive_seed(next(), stream)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pclab
