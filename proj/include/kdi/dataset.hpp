#pragma once

// Blocks of M consecutive samples with the fixed 9-row feature layout
//   [dpx, dpy, dpz, Fx, Fy, Fz, ux, uy, uz]
// plus future-motion labels, the two scalers and the train/test split.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdi/simgen.hpp"

namespace kdi {

inline constexpr std::size_t kFeatureRows = 9;
inline constexpr std::size_t kFeatureGroups = 3;
inline constexpr std::size_t kDefaultBlockLength = 10;

// Label semantics follow the motion-prediction convention: 0 = the object is
// still moving H blocks ahead (positive class), 1 = no motion.
enum class MotionClass : std::uint8_t { kMotion = 0, kNoMotion = 1 };

const char* feature_name(std::size_t row);

// Row-major 9 x width grid of feature values.
class FeatureGrid {
 public:
  FeatureGrid() = default;
  explicit FeatureGrid(std::size_t width) : width_(width), values_(kFeatureRows * width, 0.0) {}

  std::size_t width() const { return width_; }
  double& at(std::size_t row, std::size_t t) { return values_[row * width_ + t]; }
  double at(std::size_t row, std::size_t t) const { return values_[row * width_ + t]; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * width_, width_}; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  std::size_t width_ = 0;
  std::vector<double> values_;
};

struct Block {
  std::string trial_id;
  std::size_t index = 0;  // position within the trial
  FeatureGrid features;
  std::optional<MotionClass> label;

  std::size_t length() const { return features.width(); }
};

enum class Axis { kX = 0, kY = 1, kZ = 2 };
Axis parse_axis(const std::string& name);
const char* to_string(Axis axis);

std::vector<Vec3> difference_positions(const Trial& trial);

// floor(T / M) unlabeled blocks; trailing samples are dropped.
std::vector<Block> make_blocks(const Trial& trial, std::size_t block_length = kDefaultBlockLength);

// Block b takes its label from |dp_axis| at the last timestep of block
// b + horizon: <= threshold means no motion. The final `horizon` blocks stay
// unlabeled.
void assign_labels(std::span<Block> blocks, Axis axis, std::size_t horizon, double threshold);

struct LabelRule {
  Axis axis = Axis::kY;
  std::size_t horizon = 5;
  double threshold = 8e-5;  // m
};

LabelRule push_label_rule();  // y, H=5, 0.08 mm
LabelRule cut_label_rule();   // z, H=3, 0.05 mm

// Per-row min-max scaling fitted on training blocks; maps into [0,1].
class TrainScaler {
 public:
  static TrainScaler fit(std::span<const Block* const> blocks);
  static TrainScaler from_parameters(std::span<const double> mins, std::span<const double> maxs);

  bool fitted() const { return fitted_; }
  double transform(std::size_t row, double v) const;  // clipped to [0,1]
  double inverse(std::size_t row, double scaled) const;
  FeatureGrid apply(const FeatureGrid& grid) const;

  const std::array<double, kFeatureRows>& mins() const { return min_; }
  const std::array<double, kFeatureRows>& maxs() const { return max_; }

 private:
  bool fitted_ = false;
  std::array<double, kFeatureRows> min_{};
  std::array<double, kFeatureRows> max_{};
};

// Group-wise absolute-max scaling (displacement, force, input); zero maps to
// 0.5 and relative magnitudes inside a group are preserved.
class VizScaler {
 public:
  static VizScaler fit(std::span<const Block* const> blocks);
  static VizScaler from_parameters(std::span<const double> absmax);

  bool fitted() const { return fitted_; }
  double transform(std::size_t row, double v) const;
  FeatureGrid apply(const FeatureGrid& grid) const;

  const std::array<double, kFeatureGroups>& absmax() const { return absmax_; }

 private:
  bool fitted_ = false;
  std::array<double, kFeatureGroups> absmax_{};
};

enum class SplitRole : std::uint8_t { kUnassigned, kTrain, kTest };

struct SplitOptions {
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
  bool stratified = false;
};

// Assigns every labeled block to train or test. Unlabeled blocks stay
// unassigned. Deterministic in the seed.
std::vector<SplitRole> split_blocks(std::span<const Block> blocks, const SplitOptions& options);

struct TrialEntry {
  std::filesystem::path path;  // CSV path as given to the dataset builder
  std::string trial_id;
  std::string material;
  std::size_t block_count = 0;
};

// Everything needed to rebuild the exact training inputs without refitting.
struct LabeledDataset {
  TaskKind task = TaskKind::kPush;
  std::size_t block_length = kDefaultBlockLength;
  LabelRule rule;
  std::uint64_t split_seed = 0;
  std::string excluded_material;  // non-empty: held-out object experiment
  std::vector<TrialEntry> trials;
  std::vector<Block> blocks;  // all trials, in trial order
  std::vector<SplitRole> roles;
  TrainScaler train_scaler;
  VizScaler viz_scaler;

  std::vector<const Block*> select(SplitRole role) const;
  std::size_t count(SplitRole role) const;
};

struct DatasetOptions {
  std::size_t block_length = kDefaultBlockLength;
  LabelRule rule;
  SplitOptions split;
  std::string exclude_material;
};

// Reads trials, forms and labels blocks, splits, fits both scalers on the
// training split only.
LabeledDataset build_dataset(TaskKind task, std::span<const std::filesystem::path> trial_paths,
                             const DatasetOptions& options);
LabeledDataset build_dataset(TaskKind task, std::span<const Trial> trials,
                             const DatasetOptions& options);

// key=value manifest; scaler parameters stored bit-exact.
void write_manifest(const LabeledDataset& dataset, const std::filesystem::path& path);
// Re-reads the trials listed in the manifest (relative to the manifest's
// directory), re-forms blocks and checks the stored labels.
LabeledDataset read_manifest(const std::filesystem::path& path);

}  // namespace kdi
