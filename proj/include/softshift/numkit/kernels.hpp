#pragma once
// Dense double-precision inner-loop kernels.
//
// Every kernel has a portable scalar reference implementation. On x86-64 an
// AVX2/FMA variant is compiled separately and selected at runtime when the CPU
// supports it. The variants agree to rounding (summation order differs), which
// tests/kernels_test.cpp checks directly against the scalar reference.

#include <cstddef>
#include <span>
#include <string_view>

namespace softshift::numkit {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  // sum_i a_i * b_i
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i a_i
  double (*sum)(const double* a, std::size_t n);
  // max_i |a_i| (0 for n == 0)
  double (*max_abs)(const double* a, std::size_t n);
  // out_i = a_i * b_i
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // y_i += alpha * x_i
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = M v, M row-major rows x cols
  void (*gemv)(const double* m, std::size_t rows, std::size_t cols,
               const double* v, double* out);
  // out = M^T v, M row-major rows x cols
  void (*gemv_t)(const double* m, std::size_t rows, std::size_t cols,
                 const double* v, double* out);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2_kernels();

// Kernel table used by the library. Chosen once, on first use: the best
// supported ISA, unless the environment variable SOFTSHIFT_ISA=scalar is set.
const KernelTable& active_kernels();

std::string_view isa_name(Isa isa);

}  // namespace softshift::numkit
