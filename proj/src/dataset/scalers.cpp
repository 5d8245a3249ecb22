#include <algorithm>
#include <cmath>
#include <limits>

#include "kdi/dataset.hpp"
#include "kdi/error.hpp"

namespace kdi {

namespace {
double clip01(double v) { return std::clamp(v, 0.0, 1.0); }
}  // namespace

TrainScaler TrainScaler::fit(std::span<const Block* const> blocks) {
  require(!blocks.empty(), "train scaler: no blocks to fit");
  TrainScaler s;
  s.min_.fill(std::numeric_limits<double>::infinity());
  s.max_.fill(-std::numeric_limits<double>::infinity());
  for (const Block* block : blocks) {
    for (std::size_t r = 0; r < kFeatureRows; ++r) {
      for (double v : block->features.row(r)) {
        s.min_[r] = std::min(s.min_[r], v);
        s.max_[r] = std::max(s.max_[r], v);
      }
    }
  }
  for (std::size_t r = 0; r < kFeatureRows; ++r) {
    if (!(s.max_[r] > s.min_[r])) {
      throw ValidationError(std::string("train scaler: feature row ") + feature_name(r) +
                            " is constant over the training set");
    }
  }
  s.fitted_ = true;
  return s;
}

TrainScaler TrainScaler::from_parameters(std::span<const double> mins,
                                         std::span<const double> maxs) {
  require(mins.size() == kFeatureRows && maxs.size() == kFeatureRows,
          "train scaler: expected 9 minima and 9 maxima");
  TrainScaler s;
  for (std::size_t r = 0; r < kFeatureRows; ++r) {
    require(maxs[r] > mins[r], std::string("train scaler: degenerate row ") + feature_name(r));
    s.min_[r] = mins[r];
    s.max_[r] = maxs[r];
  }
  s.fitted_ = true;
  return s;
}

double TrainScaler::transform(std::size_t row, double v) const {
  return clip01((v - min_[row]) / (max_[row] - min_[row]));
}

double TrainScaler::inverse(std::size_t row, double scaled) const {
  return min_[row] + scaled * (max_[row] - min_[row]);
}

FeatureGrid TrainScaler::apply(const FeatureGrid& grid) const {
  require(fitted_, "train scaler used before fitting");
  FeatureGrid out(grid.width());
  for (std::size_t r = 0; r < kFeatureRows; ++r) {
    for (std::size_t t = 0; t < grid.width(); ++t) out.at(r, t) = transform(r, grid.at(r, t));
  }
  return out;
}

VizScaler VizScaler::fit(std::span<const Block* const> blocks) {
  require(!blocks.empty(), "viz scaler: no blocks to fit");
  VizScaler s;
  s.absmax_.fill(0.0);
  for (const Block* block : blocks) {
    for (std::size_t r = 0; r < kFeatureRows; ++r) {
      for (double v : block->features.row(r)) s.absmax_[r / 3] = std::max(s.absmax_[r / 3], std::abs(v));
    }
  }
  static constexpr const char* kGroups[] = {"displacement", "force", "input"};
  for (std::size_t g = 0; g < kFeatureGroups; ++g) {
    if (!(s.absmax_[g] > 0.0)) {
      throw ValidationError(std::string("viz scaler: ") + kGroups[g] + " group is all zero");
    }
  }
  s.fitted_ = true;
  return s;
}

VizScaler VizScaler::from_parameters(std::span<const double> absmax) {
  require(absmax.size() == kFeatureGroups, "viz scaler: expected 3 group maxima");
  VizScaler s;
  for (std::size_t g = 0; g < kFeatureGroups; ++g) {
    require(absmax[g] > 0.0, "viz scaler: group maximum must be positive");
    s.absmax_[g] = absmax[g];
  }
  s.fitted_ = true;
  return s;
}

double VizScaler::transform(std::size_t row, double v) const {
  return clip01(v / (2.0 * absmax_[row / 3]) + 0.5);
}

FeatureGrid VizScaler::apply(const FeatureGrid& grid) const {
  require(fitted_, "viz scaler used before fitting");
  FeatureGrid out(grid.width());
  for (std::size_t r = 0; r < kFeatureRows; ++r) {
    for (std::size_t t = 0; t < grid.width(); ++t) out.at(r, t) = transform(r, grid.at(r, t));
  }
  return out;
}

}  // namespace kdi
