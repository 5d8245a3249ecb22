#include <algorithm>
#include <cmath>

#include "kdi/error.hpp"
#include "kdi/explain.hpp"

namespace kdi {

Tensor gradcam_map(const Tensor& activations, const Tensor& gradients) {
  require(activations.rank() == 3, "gradcam: activations must be K x H x W");
  require_shape(gradients, activations.shape(), "gradcam gradients");
  const std::size_t K = activations.dim(0), H = activations.dim(1), W = activations.dim(2);
  const std::size_t n = H * W;
  Tensor map({H, W});
  for (std::size_t k = 0; k < K; ++k) {
    double alpha = 0.0;
    for (std::size_t e = 0; e < n; ++e) alpha += gradients[k * n + e];
    alpha /= static_cast<double>(n);
    for (std::size_t e = 0; e < n; ++e) map[e] += alpha * activations[k * n + e];
  }
  for (double& v : map.values()) v = v > 0.0 ? v : 0.0;
  return map;
}

namespace {

std::vector<double> one_hot(std::size_t classes, std::size_t target) {
  require(target < classes, "gradcam: target class out of range");
  std::vector<double> seed(classes, 0.0);
  seed[target] = 1.0;
  return seed;
}

}  // namespace

Tensor gradcam(const EventNet& net, const NetworkTrace& trace, std::size_t target_class) {
  require(net.config().variant == Variant::kCnn, "gradcam: use gradcam_clstm for clstm networks");
  const auto seed = one_hot(net.config().classes, target_class);
  const BackwardResult back = net.backward(trace, seed);
  return gradcam_map(net.target_activations(trace).front(), back.activations.front());
}

Interpolation parse_interpolation(const std::string& name) {
  if (name == "linear") return Interpolation::kLinear;
  if (name == "nearest") return Interpolation::kNearest;
  throw ValidationError("unknown interpolation '" + name + "' (expected linear|nearest)");
}

Tensor upsample_time(const Tensor& raw, std::size_t width, Interpolation mode) {
  require(raw.rank() == 2 && raw.size() > 0, "upsample: expected a non-empty H x W map");
  require(width >= 1, "upsample: target width must be positive");
  const std::size_t H = raw.dim(0), Wr = raw.dim(1);
  Tensor out({H, width});
  for (std::size_t j = 0; j < width; ++j) {
    const double pos = width == 1 ? 0.0
                                  : static_cast<double>(j) * static_cast<double>(Wr - 1) /
                                        static_cast<double>(width - 1);
    const auto i0 = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i0);
    for (std::size_t h = 0; h < H; ++h) {
      const double* row = raw.data() + h * Wr;
      double v;
      if (Wr == 1) {
        v = row[0];
      } else if (mode == Interpolation::kNearest) {
        v = row[std::min(Wr - 1, static_cast<std::size_t>(std::floor(pos + 0.5)))];
      } else {
        v = i0 + 1 < Wr && frac > 0.0 ? (1.0 - frac) * row[i0] + frac * row[i0 + 1] : row[i0];
      }
      out[h * width + j] = v;
    }
  }
  return out;
}

SaliencyMap normalize_saliency(Tensor values, std::size_t target_class) {
  SaliencyMap s;
  s.target_class = target_class;
  double peak = 0.0;
  for (double v : values.values()) {
    require(v >= 0.0, "saliency: values must be non-negative");
    peak = std::max(peak, v);
  }
  s.all_zero = !(peak > 0.0);
  if (!s.all_zero) {
    for (double& v : values.values()) v /= peak;
  }
  s.values = std::move(values);
  return s;
}

SaliencyMap gradcam_clstm(const EventNet& net, const NetworkTrace& trace, std::size_t target_class,
                          Interpolation mode) {
  require(net.config().variant == Variant::kClstm, "gradcam_clstm: network is not a clstm");
  const auto activations = net.target_activations(trace);
  require(activations.size() >= net.config().sequence_length && !activations.empty(),
          "gradcam_clstm: trace holds fewer steps than the sequence length");
  const auto seed = one_hot(net.config().classes, target_class);
  const BackwardResult back = net.backward(trace, seed);
  const std::size_t width = net.config().width;
  Tensor sum;
  for (std::size_t t = 0; t < activations.size(); ++t) {
    const Tensor m = upsample_time(gradcam_map(activations[t], back.activations[t]), width, mode);
    if (sum.empty()) {
      sum = m;
    } else {
      for (std::size_t e = 0; e < m.size(); ++e) sum[e] += m[e];
    }
  }
  for (double& v : sum.values()) v /= static_cast<double>(activations.size());
  return normalize_saliency(std::move(sum), target_class);
}

Explanation explain_sample(const EventNet& net, const Sample& sample, const ExplainOptions& options) {
  NetworkTrace trace;
  Explanation ex;
  ex.prediction.label = sample.label;
  ex.prediction.logits = net.forward(sample.frames, &trace);
  ex.prediction.predicted = argmax(ex.prediction.logits);
  ex.outcome = outcome_of(sample.label, ex.prediction.predicted);
  if (net.config().variant == Variant::kCnn) {
    const Tensor raw = gradcam(net, trace, ex.prediction.predicted);
    ex.saliency = normalize_saliency(upsample_time(raw, net.config().width, options.interpolation),
                                     ex.prediction.predicted);
  } else {
    ex.saliency = gradcam_clstm(net, trace, ex.prediction.predicted, options.interpolation);
  }
  ex.saliency.trial_id = sample.trial_id;
  ex.saliency.block_index = sample.block_index;
  ex.dominant = dominant_feature(ex.saliency, options.threshold);
  return ex;
}

std::optional<std::size_t> dominant_feature(const SaliencyMap& saliency,
                                            std::optional<double> threshold) {
  if (saliency.all_zero) return std::nullopt;
  const Tensor& v = saliency.values;
  require(v.rank() == 2, "dominant feature: saliency must be H x M");
  const std::size_t H = v.dim(0), W = v.dim(1);
  std::optional<std::size_t> best;
  double best_sum = 0.0;
  for (std::size_t h = 0; h < H; ++h) {
    double sum = 0.0;
    for (std::size_t w = 0; w < W; ++w) {
      const double x = v[h * W + w];
      if (!threshold || x >= *threshold) sum += x;
    }
    if (sum > best_sum) {
      best_sum = sum;
      best = h;
    }
  }
  return best;
}

}  // namespace kdi
