#pragma once

// Shared helpers and independent oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kdi/simgen.hpp"
#include "kdi/tensor.hpp"

namespace kdi::test {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("kdi_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void fill_uniform(Tensor& t, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : t.values()) v = u(rng);
}

// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric, double floor = 1e-3) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

// Central difference of f with respect to every entry of x; returns the
// largest relative error against `analytic`. Entries for which `skip` returns
// true are ignored.
inline double max_fd_error(Tensor& x, const Tensor& analytic, const std::function<double()>& f,
                           double eps = 1e-5,
                           const std::function<bool(std::size_t)>& skip = nullptr) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (skip && skip(i)) continue;
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = f();
    x[i] = saved - eps;
    const double down = f();
    x[i] = saved;
    worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * eps)));
  }
  return worst;
}

// Label oracle straight from raw samples: block b is labeled from sample
// (b + H + 1) M - 1; no-motion when |p[s] - p[s-1]| on the axis is within the
// threshold. Independent of difference_positions/make_blocks.
inline std::vector<std::optional<int>> brute_force_labels(const Trial& trial, std::size_t M,
                                                          std::size_t H, int axis,
                                                          double threshold) {
  const std::size_t blocks = trial.size() / M;
  std::vector<std::optional<int>> out(blocks);
  for (std::size_t b = 0; b + H < blocks; ++b) {
    const std::size_t s = (b + H + 1) * M - 1;
    const double d = s == 0 ? 0.0 : trial.position[s][axis] - trial.position[s - 1][axis];
    out[b] = std::abs(d) <= threshold ? 1 : 0;
  }
  return out;
}

}  // namespace kdi::test
