#include "sqsplat/kernels.hpp"

#include <cmath>
#include <limits>

// Scalar reference kernels. The 4-slot accumulation below is the contract
// the AVX2 variant mirrors lane for lane; do not "simplify" it to a single
// running sum or the backends stop being bit-identical.

namespace sqsplat::kernels {
namespace {

inline double combine4(double s0, double s1, double s2, double s3) {
  return (s0 + s2) + (s1 + s3);
}

double sum_scalar(const double* a, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    s0 += a[i + 0];
    s1 += a[i + 1];
    s2 += a[i + 2];
    s3 += a[i + 3];
  }
  double s = combine4(s0, s1, s2, s3);
  for (std::size_t i = n4; i < n; ++i) s += a[i];
  return s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    s0 += a[i + 0] * b[i + 0];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = combine4(s0, s1, s2, s3);
  for (std::size_t i = n4; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    s0 += std::fabs(a[i + 0] - b[i + 0]);
    s1 += std::fabs(a[i + 1] - b[i + 1]);
    s2 += std::fabs(a[i + 2] - b[i + 2]);
    s3 += std::fabs(a[i + 3] - b[i + 3]);
  }
  double s = combine4(s0, s1, s2, s3);
  for (std::size_t i = n4; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const double d0 = a[i + 0] - b[i + 0];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  double s = combine4(s0, s1, s2, s3);
  for (std::size_t i = n4; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double sqdist_one(double px, double py, double pz, double x, double y,
                         double z) {
  const double dx = px - x;
  const double dy = py - y;
  const double dz = pz - z;
  return (dx * dx + dy * dy) + dz * dz;
}

double min_sqdist_scalar(double px, double py, double pz, const double* xs,
                         const double* ys, const double* zs, std::size_t n) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sqdist_one(px, py, pz, xs[i], ys[i], zs[i]);
    if (d < best) best = d;
  }
  return best;
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend{
      "scalar",          sum_scalar,        dot_scalar,
      sum_abs_diff_scalar, sum_sq_diff_scalar, min_sqdist_scalar,
  };
  return backend;
}

std::size_t nearest_index(double px, double py, double pz, const double* xs,
                          const double* ys, const double* zs, std::size_t n,
                          double* sqdist_out) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sqdist_one(px, py, pz, xs[i], ys[i], zs[i]);
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  if (sqdist_out) *sqdist_out = best;
  return best_i;
}

}  // namespace sqsplat::kernels
