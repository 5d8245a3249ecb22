#include <algorithm>
#include <cmath>

#include "kdi/error.hpp"
#include "kdi/layers.hpp"
#include "kdi/simd.hpp"

namespace kdi {

void init_uniform_fan_in(Tensor& t, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  // 53-bit mantissa draw; independent of std::uniform_real_distribution.
  for (double& v : t.values()) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = (2.0 * u - 1.0) * bound;
  }
}

ConvLayer::ConvLayer(std::size_t in, std::size_t out, std::size_t kernel, std::size_t pad)
    : in_channels(in), out_channels(out), kernel_width(kernel), padding(pad),
      weight({out, in, 1, kernel}), bias({out}) {
  require(in > 0 && out > 0 && kernel > 0, "conv: channels and kernel width must be positive");
}

std::size_t ConvLayer::output_width(std::size_t width) const {
  if (width + 2 * padding < kernel_width) {
    throw ValidationError("conv: input width " + std::to_string(width) + " with padding " +
                          std::to_string(padding) + " is narrower than kernel " +
                          std::to_string(kernel_width));
  }
  return width + 2 * padding - kernel_width + 1;
}

Tensor conv2d_forward(const Tensor& x, const ConvLayer& layer, ConvTrace* trace) {
  require(x.rank() == 3 && x.dim(0) == layer.in_channels,
          "conv: expected input with " + std::to_string(layer.in_channels) + " channels, got " +
              shape_string(x.shape()));
  const std::size_t C = layer.in_channels, H = x.dim(1), W = x.dim(2);
  const std::size_t k = layer.kernel_width, pad = layer.padding;
  const std::size_t Wo = layer.output_width(W);
  const std::size_t P = C * k, N = H * Wo;

  ConvTrace local;
  ConvTrace& tr = trace ? *trace : local;
  tr.height = H;
  tr.width = W;
  tr.out_width = Wo;
  tr.columns.assign(P * N, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t j = 0; j < k; ++j) {
      double* col = tr.columns.data() + (c * k + j) * N;
      for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t w = 0; w < Wo; ++w) {
          const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(w + j) - static_cast<std::ptrdiff_t>(pad);
          if (src >= 0 && src < static_cast<std::ptrdiff_t>(W)) {
            col[h * Wo + w] = x.at(c, h, static_cast<std::size_t>(src));
          }
        }
      }
    }
  }

  Tensor y({layer.out_channels, H, Wo});
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    std::fill(y.data() + o * N, y.data() + (o + 1) * N, layer.bias[o]);
  }
  simd::active().gemm_nn(layer.out_channels, N, P, layer.weight.data(), tr.columns.data(), y.data());
  return y;
}

void conv2d_backward_into(const ConvTrace& trace, const ConvLayer& layer, const Tensor& upstream,
                          Tensor* dinput, Tensor* dweight, Tensor* dbias) {
  const std::size_t C = layer.in_channels, H = trace.height, W = trace.width;
  const std::size_t Wo = trace.out_width, k = layer.kernel_width, pad = layer.padding;
  const std::size_t P = C * k, N = H * Wo, K = layer.out_channels;
  require_shape(upstream, {K, H, Wo}, "conv backward upstream");
  require(trace.columns.size() == P * N, "conv backward: trace does not match layer");
  const auto& kern = simd::active();

  if (dweight) {
    require_shape(*dweight, layer.weight.shape(), "conv backward dweight");
    kern.gemm_nt(K, P, N, upstream.data(), trace.columns.data(), dweight->data());
  }
  if (dbias) {
    require_shape(*dbias, layer.bias.shape(), "conv backward dbias");
    for (std::size_t o = 0; o < K; ++o) {
      double s = 0.0;
      for (std::size_t n = 0; n < N; ++n) s += upstream[o * N + n];
      (*dbias)[o] += s;
    }
  }
  if (dinput) {
    std::vector<double> dcol(P * N, 0.0);
    kern.gemm_tn(P, N, K, layer.weight.data(), upstream.data(), dcol.data());
    *dinput = Tensor({C, H, W});
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t j = 0; j < k; ++j) {
        const double* col = dcol.data() + (c * k + j) * N;
        for (std::size_t h = 0; h < H; ++h) {
          for (std::size_t w = 0; w < Wo; ++w) {
            const std::ptrdiff_t dst = static_cast<std::ptrdiff_t>(w + j) - static_cast<std::ptrdiff_t>(pad);
            if (dst >= 0 && dst < static_cast<std::ptrdiff_t>(W)) {
              dinput->at(c, h, static_cast<std::size_t>(dst)) += col[h * Wo + w];
            }
          }
        }
      }
    }
  }
}

ConvGrads conv2d_backward(const ConvTrace& trace, const ConvLayer& layer, const Tensor& upstream) {
  ConvGrads g;
  g.weight = Tensor(layer.weight.shape());
  g.bias = Tensor(layer.bias.shape());
  conv2d_backward_into(trace, layer, upstream, &g.input, &g.weight, &g.bias);
  return g;
}

}  // namespace kdi
