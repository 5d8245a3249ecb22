#include <algorithm>
#include <cmath>

#include "kdi/error.hpp"
#include "kdi/layers.hpp"

namespace kdi {

Tensor leaky_relu(const Tensor& x, double slope) {
  require(slope > 0.0 && slope < 1.0, "leaky relu: slope must be in (0,1)");
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : slope * v;
  return y;
}

Tensor leaky_relu_backward(const Tensor& x, const Tensor& upstream, double slope) {
  require(x.shape() == upstream.shape(), "leaky relu backward: shape mismatch");
  Tensor dx = upstream;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (x[i] < 0.0) dx[i] *= slope;
  }
  return dx;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> softmax(std::span<const double> logits) {
  require(!logits.empty(), "softmax: no logits");
  const double shift = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - shift);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

LossResult softmax_cross_entropy(std::span<const double> logits, std::size_t label) {
  require(label < logits.size(), "cross entropy: label out of range");
  const double shift = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - shift);
  const double log_z = std::log(z);
  LossResult r;
  r.loss = -(logits[label] - shift - log_z);
  r.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    r.grad[i] = std::exp(logits[i] - shift - log_z) - (i == label ? 1.0 : 0.0);
  }
  return r;
}

}  // namespace kdi
