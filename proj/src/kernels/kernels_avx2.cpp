// Built with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "tvdopt/kernels.hpp"

namespace tvdopt::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t e = 0;
  for (; e + 8 <= len; e += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + e), _mm256_loadu_pd(b + e), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + e + 4), _mm256_loadu_pd(b + e + 4), acc1);
  }
  for (; e + 4 <= len; e += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + e), _mm256_loadu_pd(b + e), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; e < len; ++e) acc = std::fma(a[e], b[e], acc);
  return acc;
}

double squared_norm_avx2(const double* a, std::size_t len) { return dot_avx2(a, a, len); }

void axpy_avx2(double a, const double* x, double* y, std::size_t len) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t e = 0;
  for (; e + 4 <= len; e += 4) {
    _mm256_storeu_pd(y + e, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + e), _mm256_loadu_pd(y + e)));
  }
  for (; e < len; ++e) y[e] = std::fma(a, x[e], y[e]);
}

void axpby_avx2(double a, const double* x, double b, const double* y, double* out,
                std::size_t len) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t e = 0;
  for (; e + 4 <= len; e += 4) {
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + e));
    _mm256_storeu_pd(out + e, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + e), by));
  }
  for (; e < len; ++e) out[e] = std::fma(a, x[e], b * y[e]);
}

void weighted_sum_avx2(const double* w, const double* const* src, std::size_t count,
                       double* out, std::size_t len) {
  std::size_t e = 0;
  for (; e + 4 <= len; e += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < count; ++j) {
      acc = _mm256_fmadd_pd(_mm256_set1_pd(w[j]), _mm256_loadu_pd(src[j] + e), acc);
    }
    _mm256_storeu_pd(out + e, acc);
  }
  for (; e < len; ++e) {
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j) acc = std::fma(w[j], src[j][e], acc);
    out[e] = acc;
  }
}

constexpr KernelTable kAvx2{Isa::avx2, dot_avx2,   squared_norm_avx2,
                            axpy_avx2, axpby_avx2, weighted_sum_avx2};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace tvdopt::kernels::detail
