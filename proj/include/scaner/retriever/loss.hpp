#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "scaner/corpus/types.hpp"
#include "scaner/nn/graph.hpp"

namespace scaner::retriever {

// w = max(1, ln(gamma * N / N_l)) per label. Throws ConfigError for
// gamma <= 0 and DataError when any count is zero.
std::vector<double> compute_class_weights(const std::vector<std::size_t>& counts, double gamma);

struct ClassWeights {
  std::vector<double> evidence{1.0, 1.0};
  std::vector<double> sa{1.0, 1.0, 1.0};
  std::vector<double> si{1.0, 1.0, 1.0};
};

// Weights for the three tasks from training-paragraph label counts.
ClassWeights class_weights_for(const std::vector<corpus::Paragraph>& train, double gamma);

struct LossConfig {
  double alpha = 1.1;
  double beta = 1.5;

  void validate() const;
};

struct TaskGold {
  std::size_t evidence = 0;
  std::size_t sa = 0;
  std::size_t si = 0;
};

TaskGold task_gold(const corpus::Paragraph& p);

struct TaskLogits {
  Eigen::RowVectorXd evidence;
  Eigen::RowVectorXd sa;
  Eigen::RowVectorXd si;
};

struct TaskLosses {
  double evidence = 0.0;
  double sa = 0.0;
  double si = 0.0;

  double total(const LossConfig& config) const { return evidence + config.alpha * sa + config.beta * si; }
};

// Batch means of the class-weighted negative log-likelihood per task.
TaskLosses task_losses(const std::vector<TaskLogits>& logits, const std::vector<TaskGold>& gold,
                       const ClassWeights& weights);

double multitask_loss(const std::vector<TaskLogits>& logits, const std::vector<TaskGold>& gold,
                      const ClassWeights& weights, const LossConfig& config);

struct HeadVars {
  nn::Var vector;
  nn::Var evidence;
  nn::Var sa;
  nn::Var si;
};

// Contribution of one example to the batch loss, already divided by
// `batch_size`; summing it over the batch gives multitask_loss.
nn::Var example_loss(nn::Graph& graph, const HeadVars& heads, const TaskGold& gold, const ClassWeights& weights,
                     const LossConfig& config, std::size_t batch_size);

}  // namespace scaner::retriever
