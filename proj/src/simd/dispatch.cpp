#include <atomic>
#include <cstdlib>
#include <string>

#include "kdi/error.hpp"
#include "kdi/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <cpuid.h>
#endif

namespace kdi::simd {

#ifdef KDI_HAVE_AVX2_KERNELS
const KernelTable* avx2_kernels_impl();
#endif

const KernelTable* avx2_kernels() {
#ifdef KDI_HAVE_AVX2_KERNELS
  return avx2_kernels_impl();
#else
  return nullptr;
#endif
}

bool cpu_supports_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  unsigned eax = 0, ebx = 0, ecx = 0, edx = 0;
  if (!__get_cpuid(1, &eax, &ebx, &ecx, &edx)) return false;
  const bool fma = (ecx & (1u << 12)) != 0;
  const bool osxsave = (ecx & (1u << 27)) != 0;
  if (!fma || !osxsave) return false;
  // OS must save YMM state (XCR0 bits 1 and 2).
  unsigned xcr0_lo = 0, xcr0_hi = 0;
  __asm__ volatile("xgetbv" : "=a"(xcr0_lo), "=d"(xcr0_hi) : "c"(0));
  if ((xcr0_lo & 0x6u) != 0x6u) return false;
  if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
  return (ebx & (1u << 5)) != 0;
#else
  return false;
#endif
}

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::kScalar;
  if (name == "avx2") return Backend::kAvx2;
  throw ValidationError("unknown SIMD backend '" + std::string(name) + "'");
}

namespace {

const KernelTable* initial_table() {
  const KernelTable* best = &scalar_kernels();
  if (avx2_kernels() != nullptr && cpu_supports_avx2()) best = avx2_kernels();
  if (const char* env = std::getenv("KDI_SIMD")) {
    const std::string_view v(env);
    if (v == "scalar") return &scalar_kernels();
  }
  return best;
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void select_backend(Backend backend) {
  if (backend == Backend::kScalar) {
    slot().store(&scalar_kernels(), std::memory_order_release);
    return;
  }
  if (avx2_kernels() == nullptr || !cpu_supports_avx2()) {
    throw ValidationError("AVX2 kernels unavailable on this build or CPU");
  }
  slot().store(avx2_kernels(), std::memory_order_release);
}

}  // namespace kdi::simd
