#pragma once

#include <span>
#include <vector>

#include "kdi/tensor.hpp"

namespace kdi {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment estimates per parameter tensor plus the step count
// used for bias correction.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long long step = 0;
};

// params[i] -= lr * m_hat / (sqrt(v_hat) + eps). State is sized on first use.
void adam_update(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
                 double lr, const AdamConfig& config = {});

}  // namespace kdi
