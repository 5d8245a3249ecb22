#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls the library's backward passes except
// as the quantity under test.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kdi/convlstm.hpp"
#include "kdi/explain.hpp"
#include "kdi/layers.hpp"
#include "kdi/models.hpp"
#include "test_util.hpp"

namespace kdi::test {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  fill_uniform(t, rng, lo, hi);
  return t;
}

inline double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

// ---- finite-difference checks: each returns the worst relative error of one
// random instance. Losses are random linear functionals of the op's output.

inline double conv_fd_instance(std::mt19937_64& rng) {
  const std::size_t c = pick(rng, 1, 3), k_out = pick(rng, 1, 4), h = pick(rng, 1, 3);
  const std::size_t w = pick(rng, 3, 8), pad = pick(rng, 0, 2);
  const std::size_t kernel = pick(rng, 1, std::min<std::size_t>(5, w + 2 * pad));
  ConvLayer layer(c, k_out, kernel, pad);
  fill_uniform(layer.weight, rng);
  fill_uniform(layer.bias, rng);
  Tensor x = random_tensor({c, h, w}, rng);
  const Tensor r = random_tensor({k_out, h, layer.output_width(w)}, rng);
  auto loss = [&] { return dot(conv2d_forward(x, layer), r); };
  ConvTrace trace;
  conv2d_forward(x, layer, &trace);
  const ConvGrads g = conv2d_backward(trace, layer, r);
  return std::max({max_fd_error(x, g.input, loss), max_fd_error(layer.weight, g.weight, loss),
                   max_fd_error(layer.bias, g.bias, loss)});
}

inline double leaky_fd_instance(std::mt19937_64& rng) {
  const double slope = 0.01 + 0.5 * std::uniform_real_distribution<double>(0, 1)(rng);
  Tensor x = random_tensor({pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 2, 6)}, rng);
  const Tensor r = random_tensor(x.shape(), rng);
  auto loss = [&] { return dot(leaky_relu(x, slope), r); };
  const Tensor g = leaky_relu_backward(x, r, slope);
  // Stay 1e-4 away from the kink so the +-eps probe never straddles it.
  return max_fd_error(x, g, loss, 1e-5, [&](std::size_t i) { return std::abs(x[i]) < 1e-4; });
}

inline double dense_fd_instance(std::mt19937_64& rng) {
  DenseLayer layer(pick(rng, 1, 12), pick(rng, 1, 4));
  fill_uniform(layer.weight, rng);
  fill_uniform(layer.bias, rng);
  Tensor x = random_tensor({layer.in_features}, rng);
  const Tensor r = random_tensor({layer.out_features}, rng);
  auto loss = [&] { return dot(dense_forward(x, layer), r); };
  Tensor dx, dw(layer.weight.shape()), db(layer.bias.shape());
  dense_backward_into(x, layer, r, &dx, &dw, &db);
  return std::max({max_fd_error(x, dx, loss), max_fd_error(layer.weight, dw, loss),
                   max_fd_error(layer.bias, db, loss)});
}

inline double softmax_fd_instance(std::mt19937_64& rng) {
  const std::size_t n = pick(rng, 2, 5);
  Tensor z = random_tensor({n}, rng, -3.0, 3.0);
  const std::size_t label = pick(rng, 0, n - 1);
  auto loss = [&] { return softmax_cross_entropy(z.values(), label).loss; };
  const LossResult res = softmax_cross_entropy(z.values(), label);
  return max_fd_error(z, Tensor({n}, res.grad), loss);
}

// Three-step sequence through one cell, loss sums random functionals of every
// h_t and of the final c. Gradients w.r.t. inputs, initial state and weights.
inline double convlstm_bptt_fd_instance(std::mt19937_64& rng) {
  const std::size_t in = pick(rng, 1, 3), hid = pick(rng, 1, 3), h = pick(rng, 1, 2);
  const std::size_t w = pick(rng, 2, 5);
  const std::size_t pad = pick(rng, 0, 1);
  ConvLstmCell cell(in, hid, 2 * pad + 1, pad);
  fill_uniform(cell.gates.weight, rng, -0.8, 0.8);
  fill_uniform(cell.gates.bias, rng, -0.8, 0.8);
  constexpr std::size_t kSteps = 3;
  std::vector<Tensor> xs;
  std::vector<Tensor> rh;
  for (std::size_t t = 0; t < kSteps; ++t) {
    xs.push_back(random_tensor({in, h, w}, rng));
    rh.push_back(random_tensor({hid, h, w}, rng));
  }
  const Tensor rc = random_tensor({hid, h, w}, rng);
  ConvLstmState init{random_tensor({hid, h, w}, rng), random_tensor({hid, h, w}, rng)};

  auto loss = [&] {
    ConvLstmState s = init;
    double total = 0.0;
    for (std::size_t t = 0; t < kSteps; ++t) {
      s = convlstm_step(xs[t], s, cell);
      total += dot(s.h, rh[t]);
    }
    return total + dot(s.c, rc);
  };

  std::vector<ConvLstmTrace> traces(kSteps);
  ConvLstmState s = init;
  for (std::size_t t = 0; t < kSteps; ++t) s = convlstm_step(xs[t], s, cell, &traces[t]);
  Tensor dw(cell.gates.weight.shape()), db(cell.gates.bias.shape());
  std::vector<Tensor> dx(kSteps);
  Tensor dh_next({hid, h, w}), dc_next = rc;
  for (std::size_t t = kSteps; t-- > 0;) {
    Tensor dh = rh[t];
    for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dh_next[i];
    const ConvLstmGrads g = convlstm_backward(traces[t], cell, dh, dc_next, &dw, &db);
    dx[t] = g.x;
    dh_next = g.h_prev;
    dc_next = g.c_prev;
  }
  double worst = std::max(max_fd_error(cell.gates.weight, dw, loss), max_fd_error(cell.gates.bias, db, loss));
  for (std::size_t t = 0; t < kSteps; ++t) worst = std::max(worst, max_fd_error(xs[t], dx[t], loss));
  worst = std::max(worst, max_fd_error(init.h, dh_next, loss));
  worst = std::max(worst, max_fd_error(init.c, dc_next, loss));
  return worst;
}

// ---- Grad-CAM on a hand network: one 1x1 conv with one channel, FC straight
// off the activation map, so dy_c/dA is the FC row of class c.

struct HandCnn {
  EventNet net;
  Tensor input;
};

inline HandCnn hand_cnn(std::size_t h, std::size_t w, double conv_w, double conv_b,
                        const std::vector<double>& fc0, const std::vector<double>& fc1,
                        const std::vector<double>& input) {
  EventNetConfig cfg;
  cfg.input_channels = 1;
  cfg.height = h;
  cfg.width = w;
  cfg.conv_channels = {1};
  cfg.conv_kernels = {1};
  cfg.leaky_after = 0;
  HandCnn out{EventNet(cfg), Tensor({1, h, w}, input)};
  out.net.convs()[0].weight[0] = conv_w;
  out.net.convs()[0].bias[0] = conv_b;
  for (std::size_t i = 0; i < h * w; ++i) {
    out.net.fc().weight[i] = fc0[i];
    out.net.fc().weight[h * w + i] = fc1[i];
  }
  out.net.fc().bias[0] = 0.25;
  out.net.fc().bias[1] = -0.5;
  return out;
}

// ReLU(mean(dy/dA) * A) with A = conv_w * x + conv_b (kept positive by the
// callers so the leaky ReLU is the identity).
inline std::vector<double> hand_gradcam(double conv_w, double conv_b, const std::vector<double>& fc_row,
                                        const std::vector<double>& input) {
  double alpha = 0.0;
  for (double v : fc_row) alpha += v;
  alpha /= static_cast<double>(fc_row.size());
  std::vector<double> out;
  for (double x : input) out.push_back(std::max(0.0, alpha * (conv_w * x + conv_b)));
  return out;
}

// ---- scalar ConvLSTM Grad-CAM oracle. One layer whose i, f, o gates are
// frozen (zero weights, fixed biases); only g sees x and h. Forward and
// reverse pass are written out with scalar loops, independent of the
// library's cell code.

struct ScalarLstmNet {
  std::size_t in = 0, hid = 0, h = 0, w = 0, k = 0, pad = 0;
  std::vector<double> wg;  // [hid][in + hid][k]
  std::vector<double> bias;  // i, f, o, g per hidden channel: [4][hid]
  std::vector<double> fc;    // [2][hid h w]
  std::vector<double> fc_bias;

  double wg_at(std::size_t o, std::size_t c, std::size_t j) const { return wg[(o * (in + hid) + c) * k + j]; }
};

inline double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Returns the averaged, max-normalized H x W map for `target` over all steps.
inline std::vector<double> scalar_clstm_gradcam(const ScalarLstmNet& n, const std::vector<std::vector<double>>& xs,
                                                std::size_t target) {
  const std::size_t steps = xs.size(), plane = n.h * n.w, hsize = n.hid * plane;
  auto at = [&](std::size_t c, std::size_t y, std::size_t x) { return (c * n.h + y) * n.w + x; };
  std::vector<std::vector<double>> hs(steps + 1, std::vector<double>(hsize, 0.0));
  std::vector<std::vector<double>> cs(steps + 1, std::vector<double>(hsize, 0.0));
  std::vector<std::vector<double>> gs(steps + 1, std::vector<double>(hsize, 0.0));
  std::vector<double> gi(n.hid), gf(n.hid), go(n.hid);
  for (std::size_t o = 0; o < n.hid; ++o) {
    gi[o] = sigmoid_scalar(n.bias[0 * n.hid + o]);
    gf[o] = sigmoid_scalar(n.bias[1 * n.hid + o]);
    go[o] = sigmoid_scalar(n.bias[2 * n.hid + o]);
  }
  for (std::size_t t = 1; t <= steps; ++t) {
    const auto& x = xs[t - 1];
    for (std::size_t o = 0; o < n.hid; ++o) {
      for (std::size_t y = 0; y < n.h; ++y) {
        for (std::size_t col = 0; col < n.w; ++col) {
          double pre = n.bias[3 * n.hid + o];
          for (std::size_t j = 0; j < n.k; ++j) {
            const long src = static_cast<long>(col + j) - static_cast<long>(n.pad);
            if (src < 0 || src >= static_cast<long>(n.w)) continue;
            const auto s = static_cast<std::size_t>(src);
            for (std::size_t c = 0; c < n.in; ++c) pre += n.wg_at(o, c, j) * x[(c * n.h + y) * n.w + s];
            for (std::size_t c = 0; c < n.hid; ++c) pre += n.wg_at(o, n.in + c, j) * hs[t - 1][at(c, y, s)];
          }
          const std::size_t idx = at(o, y, col);
          gs[t][idx] = std::tanh(pre);
          cs[t][idx] = gf[o] * cs[t - 1][idx] + gi[o] * gs[t][idx];
          hs[t][idx] = go[o] * std::tanh(cs[t][idx]);
        }
      }
    }
  }
  // Reverse pass: total derivative of logit `target` w.r.t. every h_t.
  std::vector<std::vector<double>> dh(steps + 1, std::vector<double>(hsize, 0.0));
  for (std::size_t i = 0; i < hsize; ++i) dh[steps][i] = n.fc[target * hsize + i];
  std::vector<double> dc_next(hsize, 0.0);
  for (std::size_t t = steps; t >= 1; --t) {
    std::vector<double> dpre(hsize);
    for (std::size_t o = 0; o < n.hid; ++o) {
      for (std::size_t p = 0; p < plane; ++p) {
        const std::size_t idx = o * plane + p;
        const double tc = std::tanh(cs[t][idx]);
        const double dc = dh[t][idx] * go[o] * (1.0 - tc * tc) + dc_next[idx];
        dpre[idx] = dc * gi[o] * (1.0 - gs[t][idx] * gs[t][idx]);
        dc_next[idx] = dc * gf[o];
      }
    }
    for (std::size_t o = 0; o < n.hid; ++o) {
      for (std::size_t y = 0; y < n.h; ++y) {
        for (std::size_t col = 0; col < n.w; ++col) {
          for (std::size_t j = 0; j < n.k; ++j) {
            const long src = static_cast<long>(col + j) - static_cast<long>(n.pad);
            if (src < 0 || src >= static_cast<long>(n.w)) continue;
            const auto s = static_cast<std::size_t>(src);
            for (std::size_t c = 0; c < n.hid; ++c) {
              dh[t - 1][at(c, y, s)] += n.wg_at(o, n.in + c, j) * dpre[at(o, y, col)];
            }
          }
        }
      }
    }
  }
  std::vector<double> avg(plane, 0.0);
  for (std::size_t t = 1; t <= steps; ++t) {
    std::vector<double> map(plane, 0.0);
    for (std::size_t c = 0; c < n.hid; ++c) {
      double alpha = 0.0;
      for (std::size_t p = 0; p < plane; ++p) alpha += dh[t][c * plane + p];
      alpha /= static_cast<double>(plane);
      for (std::size_t p = 0; p < plane; ++p) map[p] += alpha * hs[t][c * plane + p];
    }
    for (std::size_t p = 0; p < plane; ++p) avg[p] += std::max(0.0, map[p]) / static_cast<double>(steps);
  }
  const double peak = *std::max_element(avg.begin(), avg.end());
  if (peak > 0.0) {
    for (double& v : avg) v /= peak;
  }
  return avg;
}

inline ScalarLstmNet random_scalar_lstm(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarLstmNet n;
  n.in = 2;
  n.hid = 2;
  n.h = 3;
  n.w = 5;
  n.k = 3;
  n.pad = 1;
  n.wg.resize(n.hid * (n.in + n.hid) * n.k);
  for (double& v : n.wg) v = u(rng);
  n.bias.resize(4 * n.hid);
  for (double& v : n.bias) v = u(rng);
  n.fc.resize(2 * n.hid * n.h * n.w);
  for (double& v : n.fc) v = u(rng);
  n.fc_bias = {u(rng), u(rng)};
  return n;
}

// The library network equivalent to a ScalarLstmNet.
inline EventNet library_lstm(const ScalarLstmNet& n) {
  EventNetConfig cfg;
  cfg.variant = Variant::kClstm;
  cfg.input_channels = n.in;
  cfg.height = n.h;
  cfg.width = n.w;
  cfg.lstm_layers = 1;
  cfg.lstm_channels = n.hid;
  cfg.lstm_kernel = n.k;
  cfg.lstm_padding = n.pad;
  EventNet net(cfg);
  ConvLayer& gates = net.cells()[0].gates;
  gates.weight.fill(0.0);
  const std::size_t cin = n.in + n.hid;
  for (std::size_t o = 0; o < n.hid; ++o) {
    for (std::size_t c = 0; c < cin; ++c) {
      for (std::size_t j = 0; j < n.k; ++j) gates.weight[((3 * n.hid + o) * cin + c) * n.k + j] = n.wg_at(o, c, j);
    }
  }
  for (std::size_t i = 0; i < 4 * n.hid; ++i) gates.bias[i] = n.bias[i];
  for (std::size_t i = 0; i < n.fc.size(); ++i) net.fc().weight[i] = n.fc[i];
  net.fc().bias[0] = n.fc_bias[0];
  net.fc().bias[1] = n.fc_bias[1];
  return net;
}

// Worst |library - scalar| over several random nets, both target classes.
inline double clstm_gradcam_oracle_error(std::uint64_t seed, int nets = 5) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < nets; ++trial) {
    const ScalarLstmNet n = random_scalar_lstm(rng);
    const EventNet net = library_lstm(n);
    std::vector<std::vector<double>> xs;
    std::vector<Tensor> frames;
    for (int t = 0; t < 3; ++t) {
      frames.push_back(random_tensor({n.in, n.h, n.w}, rng, 0.0, 1.0));
      xs.emplace_back(frames.back().values().begin(), frames.back().values().end());
    }
    NetworkTrace trace;
    net.forward(frames, &trace);
    for (std::size_t target : {0, 1}) {
      const std::vector<double> expect = scalar_clstm_gradcam(n, xs, target);
      const SaliencyMap got = gradcam_clstm(net, trace, target);
      for (std::size_t i = 0; i < expect.size(); ++i) worst = std::max(worst, std::abs(got.values[i] - expect[i]));
    }
  }
  return worst;
}

// ---- row isolation: returns the number of activation entries outside row l
// that differ from the all-zero-input baseline (0 means isolation holds).

inline std::size_t row_isolation_violations(const EventNet& net, std::size_t row, std::mt19937_64& rng) {
  const auto& cfg = net.config();
  std::vector<Tensor> zero(cfg.frames(), Tensor({cfg.input_channels, cfg.height, cfg.width}));
  std::vector<Tensor> probe = zero;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Tensor& f : probe) {
    for (std::size_t c = 0; c < cfg.input_channels; ++c)
      for (std::size_t x = 0; x < cfg.width; ++x) f.at(c, row, x) = u(rng);
  }
  NetworkTrace base, hit;
  net.forward(zero, &base);
  net.forward(probe, &hit);
  std::vector<std::pair<const Tensor*, const Tensor*>> pairs;
  for (std::size_t l = 0; l < base.conv_pre.size(); ++l) {
    pairs.emplace_back(&base.conv_pre[l], &hit.conv_pre[l]);
    pairs.emplace_back(&base.conv_out[l], &hit.conv_out[l]);
  }
  for (std::size_t t = 0; t < base.top_hidden.size(); ++t) pairs.emplace_back(&base.top_hidden[t], &hit.top_hidden[t]);
  std::size_t bad = 0;
  std::size_t changed_in_row = 0;
  for (const auto& [a, b] : pairs) {
    for (std::size_t c = 0; c < a->dim(0); ++c) {
      for (std::size_t y = 0; y < a->dim(1); ++y) {
        for (std::size_t x = 0; x < a->dim(2); ++x) {
          const bool same = a->at(c, y, x) == b->at(c, y, x);
          if (y != row && !same) ++bad;
          if (y == row && !same) ++changed_in_row;
        }
      }
    }
  }
  // A probe that changes nothing would pass vacuously.
  return changed_in_row == 0 ? bad + 1 : bad;
}

}  // namespace kdi::test
