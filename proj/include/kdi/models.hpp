#pragma once

// EventNet classifiers over kinodynamic images, their training loop and
// evaluation metrics.
//
// cnn:   conv(3->32, 1x5) -> conv(32->64, 1x3) -> leaky -> conv(64->128, 1x1)
//        -> flatten -> fc(2)
// clstm: 3 stacked ConvLSTM layers (32 ch, 1x5, pad 2) unrolled over a
//        sequence of 3 images; fc(2) on the last hidden state of the top layer.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdi/checkpoint.hpp"
#include "kdi/convlstm.hpp"
#include "kdi/dataset.hpp"
#include "kdi/imaging.hpp"
#include "kdi/layers.hpp"

namespace kdi {

enum class Variant { kCnn, kClstm };
Variant parse_variant(const std::string& name);
const char* to_string(Variant variant);

struct EventNetConfig {
  Variant variant = Variant::kCnn;
  std::size_t input_channels = 3;
  std::size_t height = kFeatureRows;
  std::size_t width = kDefaultBlockLength;

  std::vector<std::size_t> conv_channels{32, 64, 128};
  std::vector<std::size_t> conv_kernels{5, 3, 1};
  std::size_t leaky_after = 1;  // 0-based conv index followed by the leaky ReLU
  bool leaky_after_every_conv = false;  // ablation
  double leaky_slope = 0.01;

  std::size_t lstm_layers = 3;
  std::size_t lstm_channels = 32;
  std::size_t lstm_kernel = 5;
  std::size_t lstm_padding = 2;
  std::size_t sequence_length = 3;

  std::size_t classes = 2;
  std::uint64_t init_seed = 0;

  std::size_t frames() const { return variant == Variant::kClstm ? sequence_length : 1; }
  void validate() const;
  void store(KeyValue& kv) const;
  static EventNetConfig load(const KeyValue& kv);
};

// Forward record of one sample, enough for any backward pass and for
// Grad-CAM.
struct NetworkTrace {
  // cnn: per conv layer
  std::vector<ConvTrace> conv;
  std::vector<Tensor> conv_pre;  // conv output before the optional leaky ReLU
  std::vector<Tensor> conv_out;  // after it
  // clstm: [step][layer]
  std::vector<std::vector<ConvLstmTrace>> lstm;
  std::vector<Tensor> top_hidden;  // top-layer h per step

  Tensor fc_input;
  std::vector<double> logits;
};

struct BackwardResult {
  std::vector<Tensor> activations;  // d(seed . logits)/dA for each target activation
  std::vector<Tensor> inputs;       // per input frame
};

class EventNet {
 public:
  EventNet() = default;
  explicit EventNet(const EventNetConfig& config);

  const EventNetConfig& config() const { return config_; }

  std::vector<double> forward(std::span<const Tensor> frames, NetworkTrace* trace = nullptr) const;

  // Reverse pass seeded with d/dlogits. Parameter gradients are accumulated
  // into `param_grads` when non-null (sized on first use).
  BackwardResult backward(const NetworkTrace& trace, std::span<const double> dlogits,
                          std::vector<Tensor>* param_grads = nullptr) const;

  // Grad-CAM target: final conv output (cnn, 1 entry) or top-layer hidden
  // state per step (clstm).
  std::vector<Tensor> target_activations(const NetworkTrace& trace) const;

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<std::string> parameter_names() const;
  std::size_t parameter_count() const;

  std::vector<ConvLayer>& convs() { return convs_; }
  const std::vector<ConvLayer>& convs() const { return convs_; }
  std::vector<ConvLstmCell>& cells() { return cells_; }
  DenseLayer& fc() { return fc_; }
  const DenseLayer& fc() const { return fc_; }

  Checkpoint to_checkpoint() const;
  static EventNet from_checkpoint(const Checkpoint& checkpoint);

 private:
  bool leaky_at(std::size_t layer) const;

  EventNetConfig config_;
  std::vector<ConvLayer> convs_;
  std::vector<ConvLstmCell> cells_;
  DenseLayer fc_;
};

EventNet build_eventnet(const EventNetConfig& config);

// One classification example: 1 frame (cnn) or the 3 most recent frames of a
// trial, oldest first (clstm). The label belongs to the last frame.
struct Sample {
  std::vector<Tensor> frames;
  std::size_t label = 0;
  std::string trial_id;
  std::size_t block_index = 0;
};

Tensor image_tensor(const Image& image);

// Sample for dataset.blocks[position]; nullopt when the block is unlabeled or
// lacks predecessors in its trial.
std::optional<Sample> make_sample(const LabeledDataset& dataset, std::size_t position,
                                  std::size_t sequence_length, ColormapKind colormap);

// Network inputs for every block with the given role: train scaler, then
// colormap. Sequence samples take their predecessors from the same trial
// regardless of role; blocks without enough predecessors are skipped.
std::vector<Sample> make_samples(const LabeledDataset& dataset, SplitRole role,
                                 std::size_t sequence_length, ColormapKind colormap);

struct TrainConfig {
  double learning_rate = 3e-4;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t horizon = 5;
  double threshold = 8e-5;

  void validate() const;
};

// Training recipes: P, C1, C2, CLSTM, Gen.
TrainConfig train_preset(const std::string& name);

struct TrainResult {
  std::vector<double> loss_history;  // mean training loss per epoch
  bool single_class = false;
};

// Adam, mini-batches with gradient averaging, epoch shuffle seeded from
// config.seed. Warnings go to `log` when given.
TrainResult train(EventNet& net, std::span<const Sample> samples, const TrainConfig& config,
                  std::ostream* log = nullptr);

// Class 0 (motion) is the positive class.
enum class Outcome { kTP = 0, kTN = 1, kFP = 2, kFN = 3 };
const char* to_string(Outcome outcome);
Outcome outcome_of(std::size_t label, std::size_t predicted);

struct ConfusionCounts {
  long long tp = 0, tn = 0, fp = 0, fn = 0;
  long long total() const { return tp + tn + fp + fn; }
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Metrics {
  ConfusionCounts counts;
  std::array<ClassScores, 2> classes;
  double accuracy = 0.0;
  std::vector<double> loss_history;
};

// 0/0 is taken as 0.
Metrics metrics_from_counts(const ConfusionCounts& counts);

struct Prediction {
  std::size_t label = 0;
  std::size_t predicted = 0;
  std::vector<double> logits;
};

std::size_t argmax(std::span<const double> values);
std::vector<Prediction> predict(const EventNet& net, std::span<const Sample> samples);
Metrics evaluate(const EventNet& net, std::span<const Sample> samples);

std::string metrics_report(const Metrics& metrics);  // key=value
std::string metrics_csv(const Metrics& metrics);

}  // namespace kdi
