#include "sqsplat/kernels.hpp"

#include <atomic>

namespace sqsplat::kernels {

#if defined(SQSPLAT_KERNELS_AVX2)
const Backend& avx2_backend();  // defined in kernels_avx2.cpp
#endif

namespace {

std::atomic<bool> g_force_scalar{false};

const Backend* detect() {
#if defined(SQSPLAT_KERNELS_AVX2)
  if (__builtin_cpu_supports("avx2")) return &avx2_backend();
#endif
  return &scalar_backend();
}

}  // namespace

const Backend& active_backend() {
  static const Backend* detected = detect();
  return g_force_scalar.load(std::memory_order_relaxed) ? scalar_backend()
                                                        : *detected;
}

void force_scalar(bool on) {
  g_force_scalar.store(on, std::memory_order_relaxed);
}

}  // namespace sqsplat::kernels
