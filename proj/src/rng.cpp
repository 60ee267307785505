#include "sqsplat/rng.hpp"

#include <cmath>

namespace sqsplat {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Lemire's multiply-shift; a span of 0 means the full 64-bit range.
  if (span == 0) return static_cast<std::int64_t>(engine_());
  const std::uint64_t x = engine_();
  const auto wide = static_cast<unsigned __int128>(x) * span;
  return lo + static_cast<std::int64_t>(wide >> 64);
}

double Rng::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * m;
  have_cached_normal_ = true;
  return u * m;
}

Eigen::Vector3d Rng::unit_vector() {
  // Marsaglia (1972) rejection on the disk.
  double a, b, s;
  do {
    a = 2.0 * uniform() - 1.0;
    b = 2.0 * uniform() - 1.0;
    s = a * a + b * b;
  } while (s >= 1.0);
  const double t = 2.0 * std::sqrt(1.0 - s);
  return {a * t, b * t, 1.0 - 2.0 * s};
}

}  // namespace sqsplat
