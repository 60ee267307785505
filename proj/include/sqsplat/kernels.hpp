#pragma once

#include <cstddef>

namespace sqsplat::kernels {

/// Flat data-parallel reduction kernels used by the image metrics and the
/// brute-force nearest-neighbor path. Two implementations exist: a scalar
/// reference and an AVX2 variant selected at runtime when the CPU supports
/// it. Both use the same 4-lane accumulation pattern (independent partial
/// sums combined as (s0+s2)+(s1+s3), remainder folded in sequentially, no
/// FMA contraction), so their results are bit-identical — equivalence is
/// asserted exactly in tests, and switching backends never perturbs a run.
struct Backend {
  const char* name;
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum_abs_diff)(const double*, const double*, std::size_t);
  double (*sum_sq_diff)(const double*, const double*, std::size_t);
  // Minimum over i of (px-xs[i])^2 + (py-ys[i])^2 + (pz-zs[i])^2.
  double (*min_sqdist)(double px, double py, double pz, const double* xs,
                       const double* ys, const double* zs, std::size_t n);
};

const Backend& scalar_backend();
const Backend& active_backend();

/// Force the scalar reference path (tests use this to cross-check the
/// dispatched backend). Passing false restores runtime detection.
void force_scalar(bool on);

inline double sum(const double* a, std::size_t n) {
  return active_backend().sum(a, n);
}
inline double dot(const double* a, const double* b, std::size_t n) {
  return active_backend().dot(a, b, n);
}
inline double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  return active_backend().sum_abs_diff(a, b, n);
}
inline double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  return active_backend().sum_sq_diff(a, b, n);
}
inline double min_sqdist(double px, double py, double pz, const double* xs,
                         const double* ys, const double* zs, std::size_t n) {
  return active_backend().min_sqdist(px, py, pz, xs, ys, zs, n);
}

/// Scalar-only: index of the nearest point with lowest-index tie-break.
/// Used where correspondences (not just distances) are required.
std::size_t nearest_index(double px, double py, double pz, const double* xs,
                          const double* ys, const double* zs, std::size_t n,
                          double* sqdist_out);

}  // namespace sqsplat::kernels
