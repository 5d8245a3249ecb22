#include "kdi/convlstm.hpp"

#include <algorithm>
#include <cmath>

#include "kdi/error.hpp"

namespace kdi {

ConvLstmCell::ConvLstmCell(std::size_t input, std::size_t hidden, std::size_t kernel,
                           std::size_t pad)
    : input_channels(input), hidden_channels(hidden),
      gates(input + hidden, 4 * hidden, kernel, pad) {
  require(2 * pad + 1 == kernel, "convlstm: padding must preserve width (k = 2p + 1)");
}

ConvLstmState zero_state(const ConvLstmCell& cell, std::size_t height, std::size_t width) {
  return {Tensor({cell.hidden_channels, height, width}), Tensor({cell.hidden_channels, height, width})};
}

ConvLstmState convlstm_step(const Tensor& x, const ConvLstmState& prev, const ConvLstmCell& cell,
                            ConvLstmTrace* trace) {
  require(x.rank() == 3 && x.dim(0) == cell.input_channels, "convlstm: input channel mismatch, got " +
                                                                 shape_string(x.shape()));
  const std::size_t H = x.dim(1), W = x.dim(2), Hc = cell.hidden_channels;
  require_shape(prev.h, {Hc, H, W}, "convlstm hidden state");
  require_shape(prev.c, {Hc, H, W}, "convlstm cell state");

  Tensor joined({cell.input_channels + Hc, H, W});
  std::copy(x.values().begin(), x.values().end(), joined.data());
  std::copy(prev.h.values().begin(), prev.h.values().end(), joined.data() + x.size());

  ConvLstmTrace local;
  ConvLstmTrace& tr = trace ? *trace : local;
  const Tensor z = conv2d_forward(joined, cell.gates, &tr.conv);

  const std::size_t n = Hc * H * W;
  const Shape shape{Hc, H, W};
  tr.i = Tensor(shape);
  tr.f = Tensor(shape);
  tr.o = Tensor(shape);
  tr.g = Tensor(shape);
  tr.tanh_c = Tensor(shape);
  tr.c_prev = prev.c;
  ConvLstmState next{Tensor(shape), Tensor(shape)};
  for (std::size_t e = 0; e < n; ++e) {
    const double i = sigmoid(z[e]);
    const double f = sigmoid(z[n + e]);
    const double o = sigmoid(z[2 * n + e]);
    const double g = std::tanh(z[3 * n + e]);
    const double c = f * prev.c[e] + i * g;
    const double tc = std::tanh(c);
    tr.i[e] = i;
    tr.f[e] = f;
    tr.o[e] = o;
    tr.g[e] = g;
    tr.tanh_c[e] = tc;
    next.c[e] = c;
    next.h[e] = o * tc;
  }
  return next;
}

ConvLstmGrads convlstm_backward(const ConvLstmTrace& trace, const ConvLstmCell& cell,
                                const Tensor& dh, const Tensor& dc, Tensor* dweight, Tensor* dbias) {
  const Shape& shape = trace.i.shape();
  require_shape(dh, shape, "convlstm backward dh");
  require_shape(dc, shape, "convlstm backward dc");
  const std::size_t n = trace.i.size();
  const std::size_t Hc = cell.hidden_channels, H = shape[1], W = shape[2];

  ConvLstmGrads out;
  out.c_prev = Tensor(shape);
  Tensor dz({4 * Hc, H, W});
  for (std::size_t e = 0; e < n; ++e) {
    const double i = trace.i[e], f = trace.f[e], o = trace.o[e], g = trace.g[e];
    const double tc = trace.tanh_c[e];
    const double dct = dc[e] + dh[e] * o * (1.0 - tc * tc);
    dz[e] = dct * g * i * (1.0 - i);
    dz[n + e] = dct * trace.c_prev[e] * f * (1.0 - f);
    dz[2 * n + e] = dh[e] * tc * o * (1.0 - o);
    dz[3 * n + e] = dct * i * (1.0 - g * g);
    out.c_prev[e] = dct * f;
  }

  Tensor djoined;
  conv2d_backward_into(trace.conv, cell.gates, dz, &djoined, dweight, dbias);
  const std::size_t nx = cell.input_channels * H * W;
  out.x = Tensor({cell.input_channels, H, W},
                 std::vector<double>(djoined.data(), djoined.data() + nx));
  out.h_prev = Tensor(shape, std::vector<double>(djoined.data() + nx, djoined.data() + djoined.size()));
  return out;
}

}  // namespace kdi
