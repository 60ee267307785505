#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string_view>

namespace sqsplat {

/// Deterministic random stream. All randomness in the project flows from a
/// single run seed through named sub-streams ("scene", "init", "estimator",
/// "optimizer", ...) so that individual stages can be replayed in isolation.
///
/// The generator is std::mt19937_64 (fully pinned by the standard) and every
/// distribution below is implemented by hand on top of raw 64-bit draws, so
/// sequences are bit-identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : root_(seed), engine_(mix(seed)) {}

  Rng(std::uint64_t seed, std::string_view stream_name)
      : Rng(seed ^ fnv1a(stream_name)) {}

  /// Derive an independent named child stream; this stream is not advanced.
  Rng stream(std::string_view name) const { return Rng(root_, name); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Inclusive integer range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Standard normal (Marsaglia polar, deterministic rejection sequence).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform direction on the unit sphere.
  Eigen::Vector3d unit_vector();

  std::uint64_t raw() { return engine_(); }

 private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

  // splitmix64; decorrelates nearby seeds before feeding mt19937_64.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t root_;
  std::mt19937_64 engine_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace sqsplat
