#include <cstdlib>
#include <string_view>

#include "softshift/numkit/kernels.hpp"

namespace softshift::numkit {

#if defined(SOFTSHIFT_HAVE_AVX2)
extern const KernelTable kAvx2Kernels;
#endif

const KernelTable* avx2_kernels() {
#if defined(SOFTSHIFT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &kAvx2Kernels : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable* table = [] {
    const char* env = std::getenv("SOFTSHIFT_ISA");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return t;
    return &scalar_kernels();
  }();
  return *table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace softshift::numkit
