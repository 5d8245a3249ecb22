#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

#include "kdi/error.hpp"
#include "kdi/models.hpp"
#include "kdi/optim.hpp"

namespace kdi {

Tensor image_tensor(const Image& image) {
  return Tensor({image.channels(), image.height(), image.width()}, image.data());
}

std::optional<Sample> make_sample(const LabeledDataset& dataset, std::size_t position,
                                  std::size_t sequence_length, ColormapKind colormap) {
  require(sequence_length >= 1, "samples: sequence length must be positive");
  require(dataset.train_scaler.fitted(), "samples: dataset has no fitted train scaler");
  const auto& blocks = dataset.blocks;
  require(position < blocks.size(), "samples: block position out of range");
  const Block& block = blocks[position];
  if (!block.label || position + 1 < sequence_length) return std::nullopt;
  for (std::size_t j = 1; j < sequence_length; ++j) {
    const Block& p = blocks[position - j];
    if (p.trial_id != block.trial_id || p.index + j != block.index) return std::nullopt;
  }
  Sample s;
  for (std::size_t j = sequence_length; j-- > 0;) {
    const Block& b = blocks[position - j];
    s.frames.push_back(image_tensor(colorize(dataset.train_scaler.apply(b.features), colormap)));
  }
  s.label = static_cast<std::size_t>(*block.label);
  s.trial_id = block.trial_id;
  s.block_index = block.index;
  return s;
}

std::vector<Sample> make_samples(const LabeledDataset& dataset, SplitRole role,
                                 std::size_t sequence_length, ColormapKind colormap) {
  require(dataset.roles.size() == dataset.blocks.size(), "samples: roles do not match blocks");
  std::vector<Sample> out;
  for (std::size_t i = 0; i < dataset.blocks.size(); ++i) {
    if (dataset.roles[i] != role) continue;
    if (auto s = make_sample(dataset, i, sequence_length, colormap)) out.push_back(std::move(*s));
  }
  return out;
}

void TrainConfig::validate() const {
  require(learning_rate >= 0.0, "train: learning rate must be non-negative");
  require(epochs >= 1, "train: epochs must be at least 1");
  require(batch_size >= 1, "train: batch size must be at least 1");
  require(horizon >= 1, "train: horizon must be at least 1");
  require(threshold >= 0.0, "train: threshold must be non-negative");
}

TrainConfig train_preset(const std::string& name) {
  TrainConfig c;
  if (name == "P") {
    c.learning_rate = 3e-4;
    c.epochs = 30;
    c.horizon = 5;
    c.threshold = 8e-5;
  } else if (name == "C1" || name == "CLSTM" || name == "C2" || name == "Gen") {
    c.learning_rate = name == "C2" ? 5e-4 : 1e-3;
    c.epochs = 25;
    c.horizon = name == "Gen" ? 2 : 3;
    c.threshold = 5e-5;
  } else {
    throw ValidationError("unknown training preset '" + name + "' (expected P|C1|C2|CLSTM|Gen)");
  }
  return c;
}

TrainResult train(EventNet& net, std::span<const Sample> samples, const TrainConfig& config,
                  std::ostream* log) {
  config.validate();
  require(!samples.empty(), "train: training set is empty");
  TrainResult result;
  const std::size_t classes = net.config().classes;
  std::vector<std::size_t> per_class(classes, 0);
  for (const Sample& s : samples) {
    require(s.label < classes, "train: label out of range");
    ++per_class[s.label];
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (per_class[c] == samples.size()) {
      result.single_class = true;
      if (log) *log << "warning: training set contains only class " << c << "\n";
    }
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(samples.size());
  std::vector<double> losses(samples.size());
  AdamState adam;
  std::vector<Tensor*> params = net.parameters();
  std::vector<Tensor> grads;
  NetworkTrace trace;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      for (Tensor& g : grads) g.fill(0.0);
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = samples[order[k]];
        const auto logits = net.forward(s.frames, &trace);
        const LossResult lr = softmax_cross_entropy(logits, s.label);
        losses[order[k]] = lr.loss;
        net.backward(trace, lr.grad, &grads);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (Tensor& g : grads) {
        for (double& v : g.values()) v *= scale;
      }
      adam_update(params, grads, adam, config.learning_rate);
    }
    // Mean over samples in index order.
    const double total = std::accumulate(losses.begin(), losses.end(), 0.0);
    result.loss_history.push_back(total / static_cast<double>(samples.size()));
    if (log) *log << "epoch " << epoch + 1 << " loss " << result.loss_history.back() << "\n";
  }
  return result;
}

}  // namespace kdi
