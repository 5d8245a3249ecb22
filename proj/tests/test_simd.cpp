#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kdi/error.hpp"
#include "kdi/layers.hpp"
#include "kdi/simd.hpp"

using namespace kdi;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Relative to the magnitude of the summed terms; FMA changes rounding only.
void check_close(const std::vector<double>& a, const std::vector<double>& b, double scale) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-13 * scale);
}

}  // namespace

TEST_CASE("scalar backend always available") {
  CHECK(simd::scalar_kernels().backend == simd::Backend::kScalar);
  CHECK(simd::parse_backend("scalar") == simd::Backend::kScalar);
  CHECK(simd::parse_backend("avx2") == simd::Backend::kAvx2);
  CHECK_THROWS_AS(simd::parse_backend("neon"), ValidationError);
}

TEST_CASE("avx2 kernels match the scalar reference") {
  const simd::KernelTable* fast = simd::avx2_kernels();
  if (!fast || !simd::cpu_supports_avx2()) {
    MESSAGE("AVX2 kernels not available on this build/CPU");
    return;
  }
  const simd::KernelTable& ref = simd::scalar_kernels();
  std::mt19937_64 rng(7);
  const std::size_t sizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 13, 17, 33};
  for (std::size_t n : sizes) {
    const auto a = random_vec(n, rng), b = random_vec(n, rng);
    CHECK(std::abs(ref.dot(a.data(), b.data(), n) - fast->dot(a.data(), b.data(), n)) <=
          1e-13 * static_cast<double>(n));
    auto y1 = random_vec(n, rng);
    auto y2 = y1;
    ref.axpy(0.37, a.data(), y1.data(), n);
    fast->axpy(0.37, a.data(), y2.data(), n);
    check_close(y1, y2, 1.0);
  }
  for (std::size_t m : sizes) {
    for (std::size_t n : {1, 4, 6, 9, 36}) {
      for (std::size_t k : {1, 3, 8, 15}) {
        const auto a = random_vec(m * k, rng), b = random_vec(k * n, rng), bt = random_vec(n * k, rng);
        const auto c0 = random_vec(m * n, rng);
        auto c1 = c0, c2 = c0;
        ref.gemm_nn(m, n, k, a.data(), b.data(), c1.data());
        fast->gemm_nn(m, n, k, a.data(), b.data(), c2.data());
        check_close(c1, c2, static_cast<double>(k));
        c1 = c0;
        c2 = c0;
        ref.gemm_nt(m, n, k, a.data(), bt.data(), c1.data());
        fast->gemm_nt(m, n, k, a.data(), bt.data(), c2.data());
        check_close(c1, c2, static_cast<double>(k));
        const auto at = random_vec(k * m, rng);
        c1 = c0;
        c2 = c0;
        ref.gemm_tn(m, n, k, at.data(), b.data(), c1.data());
        fast->gemm_tn(m, n, k, at.data(), b.data(), c2.data());
        check_close(c1, c2, static_cast<double>(k));
      }
    }
  }
}

TEST_CASE("conv layer agrees across backends") {
  if (!simd::avx2_kernels() || !simd::cpu_supports_avx2()) return;
  std::mt19937_64 rng(3);
  ConvLayer layer(3, 32, 5, 0);
  init_uniform_fan_in(layer.weight, layer.fan_in(), rng);
  init_uniform_fan_in(layer.bias, layer.fan_in(), rng);
  Tensor x({3, 9, 10});
  init_uniform_fan_in(x, 1, rng);
  Tensor up({32, 9, 6});
  init_uniform_fan_in(up, 1, rng);

  simd::select_backend(simd::Backend::kScalar);
  ConvTrace t1;
  const Tensor y1 = conv2d_forward(x, layer, &t1);
  const ConvGrads g1 = conv2d_backward(t1, layer, up);
  simd::select_backend(simd::Backend::kAvx2);
  ConvTrace t2;
  const Tensor y2 = conv2d_forward(x, layer, &t2);
  const ConvGrads g2 = conv2d_backward(t2, layer, up);

  auto vec = [](const Tensor& t) { return std::vector<double>(t.values().begin(), t.values().end()); };
  check_close(vec(y1), vec(y2), 16.0);
  check_close(vec(g1.input), vec(g2.input), 64.0);
  check_close(vec(g1.weight), vec(g2.weight), 64.0);
  check_close(vec(g1.bias), vec(g2.bias), 64.0);
}
