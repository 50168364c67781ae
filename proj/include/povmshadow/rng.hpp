#pragma once

#include <cmath>
#include <cstdint>

namespace povmshadow {

/// Counter-based random stream. Each (master_seed, index...) key opens an
/// independent stream, so shot i never depends on how many shots were drawn
/// before it. The core step is the splitmix64 mixer; all floating-point
/// conversions are implemented here so output is identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Derive a stream keyed by (seed, a, b). Mixing twice decorrelates
  /// neighboring keys.
  static Rng keyed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    Rng r(mix(mix(seed ^ 0x9e3779b97f4a7c15ULL) + a) ^ mix(b + 0xbf58476d1ce4e5b9ULL));
    r.next();
    return r;
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(uniform() * n); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Rademacher +/-1.
  int sign() { return (next() >> 63) ? 1 : -1; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace povmshadow
