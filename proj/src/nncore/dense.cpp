#include "kdi/error.hpp"
#include "kdi/layers.hpp"
#include "kdi/simd.hpp"

namespace kdi {

DenseLayer::DenseLayer(std::size_t in, std::size_t out)
    : in_features(in), out_features(out), weight({out, in}), bias({out}) {
  require(in > 0 && out > 0, "dense: feature counts must be positive");
}

Tensor dense_forward(const Tensor& x, const DenseLayer& layer) {
  require(x.size() == layer.in_features, "dense: expected " + std::to_string(layer.in_features) +
                                             " inputs, got " + std::to_string(x.size()));
  const auto& kern = simd::active();
  Tensor y({layer.out_features});
  for (std::size_t o = 0; o < layer.out_features; ++o) {
    y[o] = layer.bias[o] + kern.dot(layer.weight.data() + o * layer.in_features, x.data(),
                                    layer.in_features);
  }
  return y;
}

void dense_backward_into(const Tensor& x, const DenseLayer& layer, const Tensor& upstream,
                         Tensor* dinput, Tensor* dweight, Tensor* dbias) {
  require(upstream.size() == layer.out_features, "dense backward: upstream size mismatch");
  require(x.size() == layer.in_features, "dense backward: input size mismatch");
  const auto& kern = simd::active();
  const std::size_t in = layer.in_features;
  if (dweight) {
    for (std::size_t o = 0; o < layer.out_features; ++o) {
      kern.axpy(upstream[o], x.data(), dweight->data() + o * in, in);
    }
  }
  if (dbias) {
    for (std::size_t o = 0; o < layer.out_features; ++o) (*dbias)[o] += upstream[o];
  }
  if (dinput) {
    *dinput = Tensor(x.shape());
    for (std::size_t o = 0; o < layer.out_features; ++o) {
      kern.axpy(upstream[o], layer.weight.data() + o * in, dinput->data(), in);
    }
  }
}

}  // namespace kdi
