// AVX2 + FMA kernels. Compiled with -mavx2 -mfma; only reached after a cpuid
// check in dispatch.cpp.
//
// gemm_acc accumulates every C element as a chain of fused multiply-adds over
// p = 0..k-1, in the vector body and in the tails alike, so blocking never
// changes a result bit.

#include <immintrin.h>

#include <cmath>

#include "flowsteer/kernels.hpp"

namespace flowsteer::kernels::detail {
namespace {

// One row of C, columns [j, n).
inline void gemm_row(std::size_t n, std::size_t j, std::size_t k, const double* ai,
                     const double* b, std::size_t ldb, double* ci) {
  for (; j + 8 <= n; j += 8) {
    __m256d c0 = _mm256_loadu_pd(ci + j);
    __m256d c1 = _mm256_loadu_pd(ci + j + 4);
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d a = _mm256_broadcast_sd(ai + p);
      const double* bp = b + p * ldb + j;
      c0 = _mm256_fmadd_pd(a, _mm256_loadu_pd(bp), c0);
      c1 = _mm256_fmadd_pd(a, _mm256_loadu_pd(bp + 4), c1);
    }
    _mm256_storeu_pd(ci + j, c0);
    _mm256_storeu_pd(ci + j + 4, c1);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d c0 = _mm256_loadu_pd(ci + j);
    for (std::size_t p = 0; p < k; ++p)
      c0 = _mm256_fmadd_pd(_mm256_broadcast_sd(ai + p), _mm256_loadu_pd(b + p * ldb + j), c0);
    _mm256_storeu_pd(ci + j, c0);
  }
  for (; j < n; ++j) {
    double acc = ci[j];
    for (std::size_t p = 0; p < k; ++p) acc = std::fma(ai[p], b[p * ldb + j], acc);
    ci[j] = acc;
  }
}

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
              const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + i * lda;
    const double* a1 = a0 + lda;
    const double* a2 = a1 + lda;
    const double* a3 = a2 + lda;
    double* c0p = c + i * ldc;
    double* c1p = c0p + ldc;
    double* c2p = c1p + ldc;
    double* c3p = c2p + ldc;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c00 = _mm256_loadu_pd(c0p + j), c01 = _mm256_loadu_pd(c0p + j + 4);
      __m256d c10 = _mm256_loadu_pd(c1p + j), c11 = _mm256_loadu_pd(c1p + j + 4);
      __m256d c20 = _mm256_loadu_pd(c2p + j), c21 = _mm256_loadu_pd(c2p + j + 4);
      __m256d c30 = _mm256_loadu_pd(c3p + j), c31 = _mm256_loadu_pd(c3p + j + 4);
      for (std::size_t p = 0; p < k; ++p) {
        const double* bp = b + p * ldb + j;
        const __m256d b0 = _mm256_loadu_pd(bp);
        const __m256d b1 = _mm256_loadu_pd(bp + 4);
        __m256d av = _mm256_broadcast_sd(a0 + p);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_broadcast_sd(a1 + p);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_broadcast_sd(a2 + p);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_broadcast_sd(a3 + p);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
      }
      _mm256_storeu_pd(c0p + j, c00);
      _mm256_storeu_pd(c0p + j + 4, c01);
      _mm256_storeu_pd(c1p + j, c10);
      _mm256_storeu_pd(c1p + j + 4, c11);
      _mm256_storeu_pd(c2p + j, c20);
      _mm256_storeu_pd(c2p + j + 4, c21);
      _mm256_storeu_pd(c3p + j, c30);
      _mm256_storeu_pd(c3p + j + 4, c31);
    }
    if (j < n) {
      gemm_row(n, j, k, a0, b, ldb, c0p);
      gemm_row(n, j, k, a1, b, ldb, c1p);
      gemm_row(n, j, k, a2, b, ldb, c2p);
      gemm_row(n, j, k, a3, b, ldb, c3p);
    }
  }
  for (; i < m; ++i) gemm_row(n, 0, k, a + i * lda, b, ldb, c + i * ldc);
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

double squared_distance(std::size_t n, const double* a, const double* b) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(diff, diff, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double diff = a[i] - b[i];
    s = std::fma(diff, diff, s);
  }
  return s;
}

void adam_step(std::size_t n, double* params, const double* grads, double* m, double* v, double lr,
               double beta1, double beta2, double eps, double bias1, double bias2) {
  const __m256d b1 = _mm256_set1_pd(beta1), c1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d b2 = _mm256_set1_pd(beta2), c2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d bc1 = _mm256_set1_pd(bias1), bc2 = _mm256_set1_pd(bias2);
  const __m256d lrv = _mm256_set1_pd(lr), epsv = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grads + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(c1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(c2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_div_pd(mi, bc1);
    const __m256d vhat = _mm256_div_pd(vi, bc2);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv));
    _mm256_storeu_pd(params + i, _mm256_sub_pd(_mm256_loadu_pd(params + i), step));
  }
  for (; i < n; ++i) {
    const double g = grads[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g * g);
    const double mhat = m[i] / bias1;
    const double vhat = v[i] / bias2;
    params[i] = params[i] - lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const KernelTable avx2_table{Isa::avx2, "avx2", gemm_acc, axpy, dot, squared_distance, adam_step};

}  // namespace flowsteer::kernels::detail
