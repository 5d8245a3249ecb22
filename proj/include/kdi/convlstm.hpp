#pragma once

// Convolutional LSTM cell. One width-preserving convolution over the
// channel-concatenation [x; h_prev] produces all four gate pre-activations,
// stacked in the order i, f, o, g:
//   i = sigma(.), f = sigma(.), o = sigma(.), g = tanh(.)
//   c' = f * c + i * g,   h' = o * tanh(c')

#include "kdi/layers.hpp"

namespace kdi {

struct ConvLstmCell {
  std::size_t input_channels = 0;
  std::size_t hidden_channels = 0;
  ConvLayer gates;  // (input + hidden) -> 4 hidden, 1 x k, padding keeps width

  ConvLstmCell() = default;
  ConvLstmCell(std::size_t input, std::size_t hidden, std::size_t kernel = 5, std::size_t pad = 2);
};

struct ConvLstmState {
  Tensor h;  // hidden x H x W
  Tensor c;
};

ConvLstmState zero_state(const ConvLstmCell& cell, std::size_t height, std::size_t width);

struct ConvLstmTrace {
  ConvTrace conv;
  Tensor c_prev;
  Tensor i, f, o, g;  // post-nonlinearity gate values
  Tensor tanh_c;
};

ConvLstmState convlstm_step(const Tensor& x, const ConvLstmState& prev, const ConvLstmCell& cell,
                            ConvLstmTrace* trace = nullptr);

struct ConvLstmGrads {
  Tensor x;
  Tensor h_prev;
  Tensor c_prev;
};

// dh, dc: gradients flowing into h' and c' (from the layer above / the
// future). Weight and bias gradients accumulate when non-null.
ConvLstmGrads convlstm_backward(const ConvLstmTrace& trace, const ConvLstmCell& cell,
                                const Tensor& dh, const Tensor& dc, Tensor* dweight, Tensor* dbias);

}  // namespace kdi
