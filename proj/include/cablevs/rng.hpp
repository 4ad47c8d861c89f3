#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace cablevs {

/// Deterministic random stream. All distribution transforms are implemented
/// in-place (no std::*_distribution) so identical seeds produce identical
/// sequences on every platform and standard library.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; caches the second variate.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    has_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  Eigen::Vector3d gaussian3() {
    Eigen::Vector3d v;
    v << gaussian(), gaussian(), gaussian();
    return v;
  }

  /// Uniform direction on the unit sphere.
  Eigen::Vector3d unit_vector() {
    while (true) {
      const Eigen::Vector3d v = gaussian3();
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

  /// Independent substream derived from the creating seed and a stream id;
  /// does not disturb or depend on this stream's consumption state.
  Rng fork(std::uint64_t stream) const { return Rng(mix(seed_, stream)); }

  std::uint64_t seed() const { return seed_; }

  /// splitmix64-style hash combining a seed with a stream index.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cablevs
