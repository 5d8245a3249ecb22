#include <cmath>

#include "kdi/dataset.hpp"
#include "kdi/error.hpp"

namespace kdi {

const char* feature_name(std::size_t row) {
  static constexpr const char* kNames[kFeatureRows] = {"dp_x", "dp_y", "dp_z", "F_x", "F_y",
                                                       "F_z",  "u_x",  "u_y",  "u_z"};
  require(row < kFeatureRows, "feature row out of range");
  return kNames[row];
}

Axis parse_axis(const std::string& name) {
  if (name == "x") return Axis::kX;
  if (name == "y") return Axis::kY;
  if (name == "z") return Axis::kZ;
  throw ValidationError("unknown axis '" + name + "' (expected x|y|z)");
}

const char* to_string(Axis axis) {
  switch (axis) {
    case Axis::kX: return "x";
    case Axis::kY: return "y";
    case Axis::kZ: return "z";
  }
  return "y";
}

LabelRule push_label_rule() { return {Axis::kY, 5, 8e-5}; }
LabelRule cut_label_rule() { return {Axis::kZ, 3, 5e-5}; }

std::vector<Vec3> difference_positions(const Trial& trial) {
  std::vector<Vec3> dp(trial.size(), Vec3{0.0, 0.0, 0.0});
  for (std::size_t t = 1; t < trial.size(); ++t) {
    for (int a = 0; a < 3; ++a) dp[t][a] = trial.position[t][a] - trial.position[t - 1][a];
  }
  return dp;
}

std::vector<Block> make_blocks(const Trial& trial, std::size_t block_length) {
  require(block_length >= 1, "block length must be at least 1");
  trial.validate();
  const std::vector<Vec3> dp = difference_positions(trial);
  const std::size_t count = trial.size() / block_length;
  std::vector<Block> blocks;
  blocks.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    Block block;
    block.trial_id = trial.meta.trial_id;
    block.index = b;
    block.features = FeatureGrid(block_length);
    for (std::size_t t = 0; t < block_length; ++t) {
      const std::size_t s = b * block_length + t;
      for (std::size_t a = 0; a < 3; ++a) {
        block.features.at(a, t) = dp[s][a];
        block.features.at(3 + a, t) = trial.force[s][a];
        block.features.at(6 + a, t) = trial.command[s][a];
      }
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

void assign_labels(std::span<Block> blocks, Axis axis, std::size_t horizon, double threshold) {
  require(horizon >= 1, "label horizon must be at least 1 block");
  require(threshold >= 0.0, "label threshold must be non-negative");
  const auto row = static_cast<std::size_t>(axis);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b + horizon >= blocks.size()) {
      blocks[b].label.reset();
      continue;
    }
    const FeatureGrid& future = blocks[b + horizon].features;
    const double displacement = std::abs(future.at(row, future.width() - 1));
    blocks[b].label = displacement <= threshold ? MotionClass::kNoMotion : MotionClass::kMotion;
  }
}

}  // namespace kdi
