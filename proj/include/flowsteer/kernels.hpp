#pragma once

// Dense arithmetic kernels behind the network, the integrators and the
// sliced-Wasserstein projections.
//
// Every kernel has a portable scalar reference and, where the CPU supports it,
// an AVX2+FMA variant. The variant is picked once per process from cpuid; the
// environment variable FLOWSTEER_KERNELS=scalar forces the reference path.
//
// Within one kernel table each output element is produced by the same
// sequence of operations regardless of the matrix shape it sits in, so a row
// evaluated alone is bit-identical to the same row evaluated inside a batch.

#include <cstddef>
#include <string_view>
#include <vector>

namespace flowsteer::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;

  /// C[m x n] += A[m x k] * B[k x n]; all row-major with leading dimensions.
  void (*gemm_acc)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                   const double* b, std::size_t ldb, double* c, std::size_t ldc);
  /// y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  double (*dot)(std::size_t n, const double* x, const double* y);
  /// sum_i (a_i - b_i)^2
  double (*squared_distance)(std::size_t n, const double* a, const double* b);
  /// One Adam step over a flat parameter vector.
  void (*adam_step)(std::size_t n, double* params, const double* grads, double* m, double* v,
                    double lr, double beta1, double beta2, double eps, double bias1, double bias2);
};

const KernelTable& table(Isa isa);
bool supported(Isa isa);
/// Table chosen for this process.
const KernelTable& active();
/// Override the process-wide choice; throws if the ISA is unsupported.
void set_active(Isa isa);
std::vector<Isa> available();

// Convenience wrappers over the active table.

inline void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                     const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  active().gemm_acc(m, n, k, a, lda, b, ldb, c, ldc);
}
inline void axpy(std::size_t n, double alpha, const double* x, double* y) {
  active().axpy(n, alpha, x, y);
}
inline double dot(std::size_t n, const double* x, const double* y) { return active().dot(n, x, y); }
inline double squared_distance(std::size_t n, const double* a, const double* b) {
  return active().squared_distance(n, a, b);
}

/// out[cols x rows] = in[rows x cols]^T
void transpose(std::size_t rows, std::size_t cols, const double* in, double* out);

namespace detail {
extern const KernelTable scalar_table;
#if defined(FLOWSTEER_HAVE_AVX2_TU)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace flowsteer::kernels
