#pragma once

// Synthetic datasets whose label is carried by exactly one feature row.

#include <random>
#include <string>

#include "kdi/dataset.hpp"

namespace kdi::test {

struct PlantedOptions {
  std::uint64_t seed = 1;
  std::size_t trials = 8;
  std::size_t blocks_per_trial = 50;
  std::size_t row = 4;
  double signal = 1.0;  // planted row is +signal (motion) or -signal (no motion)
  double jitter = 0.2;  // uniform spread on the planted row
  double noise = 1.0;   // std of every other row
};

inline LabeledDataset planted_dataset(const PlantedOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LabeledDataset ds;
  ds.task = TaskKind::kPush;
  ds.split_seed = o.seed;
  for (std::size_t t = 0; t < o.trials; ++t) {
    TrialEntry entry;
    entry.trial_id = "planted_" + std::to_string(t);
    entry.material = "synthetic";
    entry.block_count = o.blocks_per_trial;
    for (std::size_t b = 0; b < o.blocks_per_trial; ++b) {
      Block block;
      block.trial_id = entry.trial_id;
      block.index = b;
      block.features = FeatureGrid(kDefaultBlockLength);
      const bool motion = rng() % 2 == 0;
      block.label = motion ? MotionClass::kMotion : MotionClass::kNoMotion;
      for (std::size_t r = 0; r < kFeatureRows; ++r) {
        for (std::size_t k = 0; k < kDefaultBlockLength; ++k) {
          block.features.at(r, k) = r == o.row ? (motion ? 1.0 : -1.0) * o.signal * (1.0 + o.jitter * u(rng))
                                               : o.noise * gauss(rng);
        }
      }
      ds.blocks.push_back(std::move(block));
    }
    ds.trials.push_back(entry);
  }
  ds.roles = split_blocks(ds.blocks, {0.75, o.seed, false});
  const auto train = ds.select(SplitRole::kTrain);
  ds.train_scaler = TrainScaler::fit(train);
  ds.viz_scaler = VizScaler::fit(train);
  return ds;
}

}  // namespace kdi::test
