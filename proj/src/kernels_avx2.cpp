#include "sqsplat/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>
#include <limits>

// AVX2 kernels. Lane j of the vector accumulator corresponds to slot j of
// the scalar reference, and the horizontal reduction reproduces the scalar
// combine order (s0+s2)+(s1+s3) exactly. mul/add are kept separate (no FMA)
// so each lane performs the same IEEE operations as the scalar path.

namespace sqsplat::kernels {
namespace {

inline double hreduce(__m256d acc) {
  const __m128d lo = _mm256_castpd256_pd128(acc);   // (s0, s1)
  const __m128d hi = _mm256_extractf128_pd(acc, 1); // (s2, s3)
  const __m128d pair = _mm_add_pd(lo, hi);          // (s0+s2, s1+s3)
  const __m128d swap = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swap));     // (s0+s2)+(s1+s3)
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  }
  double s = hreduce(acc);
  for (std::size_t i = n4; i < n; ++i) s += a[i];
  return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, prod);
  }
  double s = hreduce(acc);
  for (std::size_t i = n4; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double s = hreduce(acc);
  for (std::size_t i = n4; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hreduce(acc);
  for (std::size_t i = n4; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double min_sqdist_avx2(double px, double py, double pz, const double* xs,
                       const double* ys, const double* zs, std::size_t n) {
  const __m256d vx = _mm256_set1_pd(px);
  const __m256d vy = _mm256_set1_pd(py);
  const __m256d vz = _mm256_set1_pd(pz);
  __m256d vbest = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const std::size_t n4 = n & ~std::size_t(3);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d dx = _mm256_sub_pd(vx, _mm256_loadu_pd(xs + i));
    const __m256d dy = _mm256_sub_pd(vy, _mm256_loadu_pd(ys + i));
    const __m256d dz = _mm256_sub_pd(vz, _mm256_loadu_pd(zs + i));
    const __m256d d =
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                      _mm256_mul_pd(dz, dz));
    vbest = _mm256_min_pd(vbest, d);
  }
  // min is exact under reordering, so any reduction order matches scalar.
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vbest);
  double best = lanes[0];
  if (lanes[1] < best) best = lanes[1];
  if (lanes[2] < best) best = lanes[2];
  if (lanes[3] < best) best = lanes[3];
  for (std::size_t i = n4; i < n; ++i) {
    const double dx = px - xs[i];
    const double dy = py - ys[i];
    const double dz = pz - zs[i];
    const double d = (dx * dx + dy * dy) + dz * dz;
    if (d < best) best = d;
  }
  return best;
}

}  // namespace

const Backend& avx2_backend() {
  static const Backend backend{
      "avx2",            sum_avx2,        dot_avx2,
      sum_abs_diff_avx2, sum_sq_diff_avx2, min_sqdist_avx2,
  };
  return backend;
}

}  // namespace sqsplat::kernels

#endif  // __AVX2__
