#include <cmath>
#include <random>

#include "kdi/dataset.hpp"
#include "kdi/error.hpp"

namespace kdi {

namespace {

// Fisher-Yates with a fixed draw rule so the order does not depend on the
// standard library's distribution implementation.
void shuffle(std::vector<std::size_t>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

std::size_t train_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

std::vector<SplitRole> split_blocks(std::span<const Block> blocks, const SplitOptions& options) {
  require(options.train_fraction > 0.0 && options.train_fraction < 1.0,
          "split: train fraction must be in (0,1)");
  std::vector<SplitRole> roles(blocks.size(), SplitRole::kUnassigned);
  std::vector<std::size_t> pools[2];
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!blocks[i].label) continue;
    const auto cls = options.stratified ? static_cast<std::size_t>(*blocks[i].label) : 0;
    pools[cls].push_back(i);
  }
  require(!pools[0].empty() || !pools[1].empty(), "split: dataset has no labeled blocks");

  std::mt19937_64 rng(options.seed);
  for (auto& pool : pools) {
    shuffle(pool, rng);
    const std::size_t n_train = train_count(pool.size(), options.train_fraction);
    for (std::size_t k = 0; k < pool.size(); ++k) {
      roles[pool[k]] = k < n_train ? SplitRole::kTrain : SplitRole::kTest;
    }
  }
  return roles;
}

std::vector<const Block*> LabeledDataset::select(SplitRole role) const {
  std::vector<const Block*> out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (roles[i] == role) out.push_back(&blocks[i]);
  }
  return out;
}

std::size_t LabeledDataset::count(SplitRole role) const {
  std::size_t n = 0;
  for (auto r : roles) n += (r == role);
  return n;
}

}  // namespace kdi
