#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string_view>

#include "flowsteer/error.hpp"
#include "flowsteer/kernels.hpp"

namespace flowsteer::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if defined(FLOWSTEER_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* choose() {
  const char* forced = std::getenv("FLOWSTEER_KERNELS");
  if (forced != nullptr && std::string_view(forced) == "scalar") return &detail::scalar_table;
#if defined(FLOWSTEER_HAVE_AVX2_TU)
  if (cpu_has_avx2_fma()) return &detail::avx2_table;
#endif
  return &detail::scalar_table;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{choose()};
  return table;
}

}  // namespace

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2_fma();
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) throw DomainError("kernel set not supported on this CPU");
#if defined(FLOWSTEER_HAVE_AVX2_TU)
  if (isa == Isa::avx2) return detail::avx2_table;
#endif
  return detail::scalar_table;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void set_active(Isa isa) { current().store(&table(isa), std::memory_order_relaxed); }

std::vector<Isa> available() {
  std::vector<Isa> out{Isa::scalar};
  if (supported(Isa::avx2)) out.push_back(Isa::avx2);
  return out;
}

void transpose(std::size_t rows, std::size_t cols, const double* in, double* out) {
  constexpr std::size_t block = 32;
  for (std::size_t i0 = 0; i0 < rows; i0 += block)
    for (std::size_t j0 = 0; j0 < cols; j0 += block) {
      const std::size_t i1 = std::min(rows, i0 + block), j1 = std::min(cols, j0 + block);
      for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = j0; j < j1; ++j) out[j * rows + i] = in[i * cols + j];
    }
}

}  // namespace flowsteer::kernels
