// Portable reference kernels. Plain multiply-then-add, no contraction.

#include <cmath>

#include "flowsteer/kernels.hpp"

namespace flowsteer::kernels::detail {
namespace {

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
              const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * ldc;
    const double* ai = a + i * lda;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* bp = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) ci[j] = ci[j] + aip * bp[j];
    }
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

double dot(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s = s + x[i] * y[i];
  return s;
}

double squared_distance(std::size_t n, const double* a, const double* b) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = a[i] - b[i];
    s = s + diff * diff;
  }
  return s;
}

void adam_step(std::size_t n, double* params, const double* grads, double* m, double* v, double lr,
               double beta1, double beta2, double eps, double bias1, double bias2) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g * g);
    const double mhat = m[i] / bias1;
    const double vhat = v[i] / bias2;
    params[i] = params[i] - lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const KernelTable scalar_table{Isa::scalar, "scalar", gemm_acc, axpy, dot, squared_distance, adam_step};

}  // namespace flowsteer::kernels::detail
