#pragma once

#include <cmath>
#include <cstdint>

#include "poseobs/types.hpp"

namespace poseobs {

/// Counter-based uniform generator (splitmix64 output function over an
/// incrementing counter). Bit-reproducible across runs and platforms.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(seed ^ mix(stream * 0x9E3779B97F4A7C15ULL))) {}

  std::uint64_t next_u64() {
    return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform draw in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Standard normal draws via Box-Muller on top of CounterRng.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 =
        (static_cast<double>(rng_.next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = rng_.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec3 next_vec3() {
    Vec3 v;
    v.x() = next();
    v.y() = next();
    v.z() = next();
    return v;
  }

 private:
  CounterRng rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

namespace rng_stream {
inline constexpr std::uint64_t gyro = 1;
inline constexpr std::uint64_t accel = 2;
inline constexpr std::uint64_t landmarks = 3;
inline constexpr std::uint64_t test = 99;
}  // namespace rng_stream

}  // namespace poseobs
