#include <cstdlib>
#include <stdexcept>
#include <string>

#include "equiterm/kernels.hpp"

namespace equiterm::kernels {
namespace {

constexpr KernelTable kScalar{Isa::Scalar, scalar::dot, scalar::axpy, scalar::gemv, scalar::syr};
#if defined(EQUITERM_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2, avx2::dot, avx2::axpy, avx2::gemv, avx2::syr};
#endif

const KernelTable& select() {
  const char* env = std::getenv("EQUITERM_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return kScalar;
#if defined(EQUITERM_HAVE_AVX2)
  if (isa_supported(Isa::Avx2)) return kAvx2;
#endif
  return kScalar;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(EQUITERM_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

const KernelTable& table_for(Isa isa) {
  if (!isa_supported(isa)) throw std::invalid_argument("kernel ISA not supported: " + std::string(isa_name(isa)));
#if defined(EQUITERM_HAVE_AVX2)
  if (isa == Isa::Avx2) return kAvx2;
#endif
  return kScalar;
}

}  // namespace equiterm::kernels
