#include "scaner/nn/adam.hpp"

#include <algorithm>
#include <cmath>

#include "scaner/common/error.hpp"

namespace scaner::nn {

Adam::Adam(const ParameterStore& params, AdamConfig config)
    : config_(config), m_(params.zeros_like()), v_(params.zeros_like()) {}

double Adam::learning_rate_at(std::size_t step) const {
  if (config_.warmup_steps == 0) return config_.learning_rate;
  return config_.learning_rate *
         std::min(1.0, static_cast<double>(step) / static_cast<double>(config_.warmup_steps));
}

void Adam::step(ParameterStore& params, const Gradients& grads) {
  if (grads.size() != params.size() || m_.size() != params.size()) {
    throw ConfigError("adam: gradient count does not match parameters");
  }
  ++step_;
  const double lr = learning_rate_at(step_);
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i].cwiseProduct(grads[i]);
    params.value(i).array() -=
        lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + config_.epsilon);
  }
}

}  // namespace scaner::nn
