#pragma once

#include <cstdint>
#include <random>

namespace uavgame {

/// SplitMix64 finaliser. Used only to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of stream `stream` within the family identified by `seed`.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Stream ids used by a single run.
enum class Stream : std::uint64_t { deployment = 1, learning = 2 };

/// mt19937_64 with a draw counter and distribution code that does not depend
/// on the standard library implementation, so trajectories are reproducible
/// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, Stream stream)
      : engine_(stream_seed(seed, static_cast<std::uint64_t>(stream))) {}

  std::uint64_t next() {
    ++draws_;
    return engine_();
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi]; returns lo exactly when lo == hi.
  /// Always consumes one draw.
  double uniform(double lo, double hi) {
    const double u = uniform();
    return lo == hi ? lo : lo + (hi - lo) * u;
  }

  /// Uniform integer on [0, n), n > 0, by rejection (no modulo bias).
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  [[nodiscard]] std::uint64_t draws() const noexcept { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace uavgame
