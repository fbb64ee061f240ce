#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace tvcs {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based seed derivation. A stream is addressed by (master, index),
/// so trial i of an experiment can be regenerated without replaying the
/// streams before it.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  constexpr std::uint64_t value() const noexcept {
    return mix64(master_seed + 0x9E3779B97F4A7C15ULL * (stream_index + 1));
  }

  /// Sub-stream `index` of this stream.
  constexpr SeedSpec child(std::uint64_t index) const noexcept {
    return SeedSpec{value(), index};
  }

  friend constexpr bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Thin wrapper over a 64-bit Mersenne twister seeded from a SeedSpec.
class Rng {
 public:
  explicit Rng(const SeedSpec& seed) : engine_(seed.value()) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  Eigen::VectorXd gaussian_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace tvcs
