#pragma once

// Hand-differentiated layers for C x H x W inputs. Convolutions use 1 x k
// filters, so rows of the input never mix: a row of the output depends only on
// the same row of the input.

#include <cstdint>
#include <random>
#include <span>

#include "kdi/tensor.hpp"

namespace kdi {

// Centered uniform init in +-1/sqrt(fan_in).
void init_uniform_fan_in(Tensor& t, std::size_t fan_in, std::mt19937_64& rng);

struct ConvLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_width = 1;
  std::size_t padding = 0;  // columns of zeros on each side; rows are never padded
  Tensor weight;            // out x in x 1 x k
  Tensor bias;              // out

  ConvLayer() = default;
  ConvLayer(std::size_t in, std::size_t out, std::size_t kernel, std::size_t pad = 0);

  std::size_t output_width(std::size_t width) const;  // W + 2p - k + 1, throws if < 1
  std::size_t fan_in() const { return in_channels * kernel_width; }
};

// What backward needs from a forward pass: the unfolded input patches.
struct ConvTrace {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t out_width = 0;
  std::vector<double> columns;  // (C k) x (H W'), row p = c k + j
};

struct ConvGrads {
  Tensor input;   // C x H x W
  Tensor weight;  // like layer.weight
  Tensor bias;
};

Tensor conv2d_forward(const Tensor& x, const ConvLayer& layer, ConvTrace* trace = nullptr);
ConvGrads conv2d_backward(const ConvTrace& trace, const ConvLayer& layer, const Tensor& upstream);
// Accumulates into dweight/dbias when non-null; overwrites dinput when non-null.
void conv2d_backward_into(const ConvTrace& trace, const ConvLayer& layer, const Tensor& upstream,
                          Tensor* dinput, Tensor* dweight, Tensor* dbias);

Tensor leaky_relu(const Tensor& x, double slope);
// Subgradient 1 at x == 0.
Tensor leaky_relu_backward(const Tensor& x, const Tensor& upstream, double slope);

struct DenseLayer {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  Tensor weight;  // out x in
  Tensor bias;    // out

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out);
};

Tensor dense_forward(const Tensor& x, const DenseLayer& layer);  // x flattened
void dense_backward_into(const Tensor& x, const DenseLayer& layer, const Tensor& upstream,
                         Tensor* dinput, Tensor* dweight, Tensor* dbias);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d logits = softmax - onehot
};

std::vector<double> softmax(std::span<const double> logits);
LossResult softmax_cross_entropy(std::span<const double> logits, std::size_t label);

double sigmoid(double x);

}  // namespace kdi
