#pragma once

#include <cstddef>

#include "scaner/nn/parameters.hpp"

namespace scaner::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Linear ramp from 0 over this many steps, then constant.
  std::size_t warmup_steps = 0;
};

class Adam {
 public:
  Adam(const ParameterStore& params, AdamConfig config);

  // Applies one update from gradients already averaged over the batch.
  void step(ParameterStore& params, const Gradients& grads);

  double learning_rate_at(std::size_t step) const;
  std::size_t steps() const { return step_; }

 private:
  AdamConfig config_;
  std::size_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace scaner::nn
