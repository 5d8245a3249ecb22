#include <algorithm>
#include <random>

#include "kdi/error.hpp"
#include "kdi/models.hpp"

namespace kdi {

Variant parse_variant(const std::string& name) {
  if (name == "cnn") return Variant::kCnn;
  if (name == "clstm") return Variant::kClstm;
  throw ValidationError("unknown network variant '" + name + "' (expected cnn|clstm)");
}

const char* to_string(Variant variant) { return variant == Variant::kCnn ? "cnn" : "clstm"; }

void EventNetConfig::validate() const {
  require(input_channels > 0 && height > 0 && width > 0, "eventnet: input shape must be positive");
  require(classes >= 2, "eventnet: need at least 2 classes");
  require(leaky_slope > 0.0 && leaky_slope < 1.0, "eventnet: leaky slope must be in (0,1)");
  if (variant == Variant::kCnn) {
    require(!conv_channels.empty() && conv_channels.size() == conv_kernels.size(),
            "eventnet: conv channel and kernel lists must have equal non-zero length");
    require(leaky_after < conv_channels.size(), "eventnet: leaky_after out of range");
    std::size_t w = width;
    for (std::size_t k : conv_kernels) {
      require(k >= 1 && k <= w, "eventnet: conv kernel wider than its input");
      w = w - k + 1;
    }
  } else {
    require(lstm_layers >= 1 && lstm_channels >= 1, "eventnet: clstm needs layers and channels");
    require(2 * lstm_padding + 1 == lstm_kernel, "eventnet: clstm padding must preserve width");
    require(sequence_length >= 1, "eventnet: sequence length must be positive");
  }
}

namespace {

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<std::size_t> split_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(',', start);
    const std::string item = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    const long long v = parse_int(item);
    require(v >= 0, "eventnet: negative size in list '" + s + "'");
    out.push_back(static_cast<std::size_t>(v));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

void EventNetConfig::store(KeyValue& kv) const {
  kv.set("net.variant", std::string(to_string(variant)));
  kv.set("net.input", std::to_string(input_channels) + "," + std::to_string(height) + "," +
                          std::to_string(width));
  kv.set("net.conv_channels", join_sizes(conv_channels));
  kv.set("net.conv_kernels", join_sizes(conv_kernels));
  kv.set("net.leaky_after", static_cast<long long>(leaky_after));
  kv.set("net.leaky_every", static_cast<long long>(leaky_after_every_conv ? 1 : 0));
  kv.set_exact("net.leaky_slope", leaky_slope);
  kv.set("net.lstm", std::to_string(lstm_layers) + "," + std::to_string(lstm_channels) + "," +
                         std::to_string(lstm_kernel) + "," + std::to_string(lstm_padding) + "," +
                         std::to_string(sequence_length));
  kv.set("net.classes", static_cast<long long>(classes));
  kv.set("net.init_seed", std::to_string(init_seed));
}

EventNetConfig EventNetConfig::load(const KeyValue& kv) {
  EventNetConfig c;
  c.variant = parse_variant(kv.get("net.variant"));
  const auto input = split_sizes(kv.get("net.input"));
  require(input.size() == 3, "eventnet: net.input needs 3 entries");
  c.input_channels = input[0];
  c.height = input[1];
  c.width = input[2];
  c.conv_channels = split_sizes(kv.get("net.conv_channels"));
  c.conv_kernels = split_sizes(kv.get("net.conv_kernels"));
  c.leaky_after = static_cast<std::size_t>(kv.get_int("net.leaky_after"));
  c.leaky_after_every_conv = kv.get_int("net.leaky_every") != 0;
  c.leaky_slope = kv.get_double("net.leaky_slope");
  const auto lstm = split_sizes(kv.get("net.lstm"));
  require(lstm.size() == 5, "eventnet: net.lstm needs 5 entries");
  c.lstm_layers = lstm[0];
  c.lstm_channels = lstm[1];
  c.lstm_kernel = lstm[2];
  c.lstm_padding = lstm[3];
  c.sequence_length = lstm[4];
  c.classes = static_cast<std::size_t>(kv.get_int("net.classes"));
  c.init_seed = std::stoull(kv.get("net.init_seed"));
  c.validate();
  return c;
}

EventNet::EventNet(const EventNetConfig& config) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(config_.init_seed);
  std::size_t fc_in = 0;
  if (config_.variant == Variant::kCnn) {
    std::size_t channels = config_.input_channels, w = config_.width;
    for (std::size_t l = 0; l < config_.conv_channels.size(); ++l) {
      ConvLayer layer(channels, config_.conv_channels[l], config_.conv_kernels[l], 0);
      init_uniform_fan_in(layer.weight, layer.fan_in(), rng);
      init_uniform_fan_in(layer.bias, layer.fan_in(), rng);
      w = layer.output_width(w);
      channels = layer.out_channels;
      convs_.push_back(std::move(layer));
    }
    fc_in = channels * config_.height * w;
  } else {
    std::size_t channels = config_.input_channels;
    for (std::size_t l = 0; l < config_.lstm_layers; ++l) {
      ConvLstmCell cell(channels, config_.lstm_channels, config_.lstm_kernel, config_.lstm_padding);
      init_uniform_fan_in(cell.gates.weight, cell.gates.fan_in(), rng);
      init_uniform_fan_in(cell.gates.bias, cell.gates.fan_in(), rng);
      channels = config_.lstm_channels;
      cells_.push_back(std::move(cell));
    }
    fc_in = channels * config_.height * config_.width;
  }
  fc_ = DenseLayer(fc_in, config_.classes);
  init_uniform_fan_in(fc_.weight, fc_in, rng);
  init_uniform_fan_in(fc_.bias, fc_in, rng);
}

EventNet build_eventnet(const EventNetConfig& config) { return EventNet(config); }

bool EventNet::leaky_at(std::size_t layer) const {
  return config_.leaky_after_every_conv || layer == config_.leaky_after;
}

std::vector<double> EventNet::forward(std::span<const Tensor> frames, NetworkTrace* trace) const {
  require(frames.size() == config_.frames(),
          "eventnet: expected " + std::to_string(config_.frames()) + " input frame(s), got " +
              std::to_string(frames.size()));
  const Shape in_shape{config_.input_channels, config_.height, config_.width};
  for (const Tensor& f : frames) {
    require_shape(f, in_shape, "eventnet input");
    require_finite(f, "eventnet input");
  }
  NetworkTrace local;
  NetworkTrace& tr = trace ? *trace : local;
  tr = NetworkTrace{};

  if (config_.variant == Variant::kCnn) {
    tr.conv.resize(convs_.size());
    Tensor x = frames[0];
    for (std::size_t l = 0; l < convs_.size(); ++l) {
      Tensor z = conv2d_forward(x, convs_[l], &tr.conv[l]);
      x = leaky_at(l) ? leaky_relu(z, config_.leaky_slope) : z;
      tr.conv_pre.push_back(std::move(z));
      tr.conv_out.push_back(x);
    }
    tr.fc_input = std::move(x);
  } else {
    std::vector<ConvLstmState> states;
    for (const auto& cell : cells_) states.push_back(zero_state(cell, config_.height, config_.width));
    tr.lstm.resize(frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
      tr.lstm[t].resize(cells_.size());
      const Tensor* input = &frames[t];
      for (std::size_t l = 0; l < cells_.size(); ++l) {
        states[l] = convlstm_step(*input, states[l], cells_[l], &tr.lstm[t][l]);
        input = &states[l].h;
      }
      tr.top_hidden.push_back(states.back().h);
    }
    tr.fc_input = states.back().h;
  }
  const Tensor logits = dense_forward(tr.fc_input, fc_);
  require_finite(logits, "eventnet logits");
  tr.logits.assign(logits.values().begin(), logits.values().end());
  return tr.logits;
}

BackwardResult EventNet::backward(const NetworkTrace& trace, std::span<const double> dlogits,
                                  std::vector<Tensor>* param_grads) const {
  require(dlogits.size() == config_.classes, "eventnet backward: seed size mismatch");
  require(!trace.logits.empty(), "eventnet backward: trace has no forward pass");
  if (param_grads && param_grads->empty()) {
    for (const Tensor* p : parameters()) param_grads->emplace_back(p->shape());
  }
  // Parameter slots: per layer (weight, bias), fc last.
  auto slot = [&](std::size_t i) -> Tensor* { return param_grads ? &(*param_grads)[i] : nullptr; };
  const std::size_t fc_slot = 2 * (config_.variant == Variant::kCnn ? convs_.size() : cells_.size());

  BackwardResult out;
  const Tensor up({config_.classes}, std::vector<double>(dlogits.begin(), dlogits.end()));
  Tensor dfc;
  dense_backward_into(trace.fc_input, fc_, up, &dfc, slot(fc_slot), slot(fc_slot + 1));

  if (config_.variant == Variant::kCnn) {
    Tensor da = dfc.reshaped(trace.conv_out.back().shape());
    out.activations.push_back(da);
    for (std::size_t l = convs_.size(); l-- > 0;) {
      const Tensor dz = leaky_at(l) ? leaky_relu_backward(trace.conv_pre[l], da, config_.leaky_slope) : da;
      Tensor dx;
      conv2d_backward_into(trace.conv[l], convs_[l], dz, &dx, slot(2 * l), slot(2 * l + 1));
      da = std::move(dx);
    }
    out.inputs.push_back(std::move(da));
  } else {
    const std::size_t S = trace.lstm.size(), L = cells_.size();
    const Shape hshape{config_.lstm_channels, config_.height, config_.width};
    std::vector<Tensor> dh(L, Tensor(hshape)), dc(L, Tensor(hshape));
    out.activations.resize(S);
    out.inputs.resize(S);
    for (std::size_t t = S; t-- > 0;) {
      Tensor dh_in = dh[L - 1];
      if (t + 1 == S) {
        for (std::size_t e = 0; e < dh_in.size(); ++e) dh_in[e] += dfc[e];
      }
      out.activations[t] = dh_in;
      for (std::size_t l = L; l-- > 0;) {
        if (l + 1 < L) {
          // dh_in holds the gradient from the layer above; add the recurrent one.
          for (std::size_t e = 0; e < dh_in.size(); ++e) dh_in[e] += dh[l][e];
        }
        ConvLstmGrads g = convlstm_backward(trace.lstm[t][l], cells_[l], dh_in, dc[l], slot(2 * l),
                                            slot(2 * l + 1));
        dh[l] = std::move(g.h_prev);
        dc[l] = std::move(g.c_prev);
        dh_in = std::move(g.x);
      }
      out.inputs[t] = std::move(dh_in);
    }
  }
  return out;
}

std::vector<Tensor> EventNet::target_activations(const NetworkTrace& trace) const {
  if (config_.variant == Variant::kCnn) {
    require(!trace.conv_out.empty(), "eventnet: trace has no conv activations");
    return {trace.conv_out.back()};
  }
  require(!trace.top_hidden.empty(), "eventnet: trace has no recurrent activations");
  return trace.top_hidden;
}

std::vector<Tensor*> EventNet::parameters() {
  std::vector<Tensor*> p;
  for (auto& c : convs_) {
    p.push_back(&c.weight);
    p.push_back(&c.bias);
  }
  for (auto& c : cells_) {
    p.push_back(&c.gates.weight);
    p.push_back(&c.gates.bias);
  }
  p.push_back(&fc_.weight);
  p.push_back(&fc_.bias);
  return p;
}

std::vector<const Tensor*> EventNet::parameters() const {
  auto mut = const_cast<EventNet*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> EventNet::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < convs_.size(); ++l) {
    names.push_back("conv" + std::to_string(l) + ".weight");
    names.push_back("conv" + std::to_string(l) + ".bias");
  }
  for (std::size_t l = 0; l < cells_.size(); ++l) {
    names.push_back("lstm" + std::to_string(l) + ".weight");
    names.push_back("lstm" + std::to_string(l) + ".bias");
  }
  names.push_back("fc.weight");
  names.push_back("fc.bias");
  return names;
}

std::size_t EventNet::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* p : parameters()) n += p->size();
  return n;
}

Checkpoint EventNet::to_checkpoint() const {
  Checkpoint cp;
  config_.store(cp.meta);
  const auto names = parameter_names();
  const auto params = parameters();
  for (std::size_t i = 0; i < params.size(); ++i) cp.tensors.push_back({names[i], *params[i]});
  return cp;
}

EventNet EventNet::from_checkpoint(const Checkpoint& checkpoint) {
  EventNet net(EventNetConfig::load(checkpoint.meta));
  const auto names = net.parameter_names();
  auto params = net.parameters();
  require(checkpoint.tensors.size() == params.size(), "checkpoint: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& t = checkpoint.find(names[i]);
    require_shape(t, params[i]->shape(), "checkpoint tensor " + names[i]);
    *params[i] = t;
  }
  return net;
}

}  // namespace kdi
