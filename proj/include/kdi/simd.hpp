#pragma once

// Dense double-precision kernels behind the convolution and fully-connected
// layers. A scalar reference table is always present; an AVX2/FMA table is
// compiled on x86-64 and picked at runtime when the CPU supports it.
//
// All matrices are row-major and contiguous. Every GEMM variant accumulates
// into C, so callers initialise C (zeros or broadcast bias) first.
//
// Backend selection: KDI_SIMD=scalar|avx2|auto in the environment, or
// select_backend() from code. The choice is process-wide.

#include <cstddef>
#include <string_view>

namespace kdi::simd {

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  Backend backend;
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // C[m x n] += A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c);
  // C[m x n] += A[m x k] * B[n x k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c);
  // C[m x n] += A[k x m]^T * B[k x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c);
};

const KernelTable& scalar_kernels();
// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels();

bool cpu_supports_avx2();

const KernelTable& active();
void select_backend(Backend backend);  // throws ValidationError if unavailable
Backend parse_backend(std::string_view name);

}  // namespace kdi::simd
