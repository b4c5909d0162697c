#include "scaner/retriever/loss.hpp"

#include <cmath>

#include "scaner/common/error.hpp"

namespace scaner::retriever {

std::vector<double> compute_class_weights(const std::vector<std::size_t>& counts, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (counts.empty()) throw DataError("class weights need at least one label");
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) throw DataError("class weight undefined: label " + std::to_string(i) + " has zero count");
    total += static_cast<double>(counts[i]);
  }
  std::vector<double> w;
  for (auto n : counts) w.push_back(std::max(1.0, std::log(gamma * total / static_cast<double>(n))));
  return w;
}

ClassWeights class_weights_for(const std::vector<corpus::Paragraph>& train, double gamma) {
  std::vector<std::size_t> evi(2, 0), sa(3, 0), si(3, 0);
  for (const auto& p : train) {
    const auto g = task_gold(p);
    ++evi[g.evidence];
    ++sa[g.sa];
    ++si[g.si];
  }
  try {
    return {compute_class_weights(evi, gamma), compute_class_weights(sa, gamma), compute_class_weights(si, gamma)};
  } catch (const DataError& e) {
    throw DataError(std::string("training paragraphs: ") + e.what());
  }
}

void LossConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("alpha and beta must be non-negative");
}

TaskGold task_gold(const corpus::Paragraph& p) { return {index_of(p.evidence), index_of(p.sa_label), index_of(p.si_label)}; }

namespace {

double nll(const Eigen::RowVectorXd& z, std::size_t gold) {
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum()) - z(static_cast<Eigen::Index>(gold));
}

}  // namespace

TaskLosses task_losses(const std::vector<TaskLogits>& logits, const std::vector<TaskGold>& gold,
                       const ClassWeights& weights) {
  if (logits.size() != gold.size()) throw DataError("loss: logits and gold labels differ in length");
  TaskLosses l;
  if (logits.empty()) return l;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    l.evidence += weights.evidence.at(gold[i].evidence) * nll(logits[i].evidence, gold[i].evidence);
    l.sa += weights.sa.at(gold[i].sa) * nll(logits[i].sa, gold[i].sa);
    l.si += weights.si.at(gold[i].si) * nll(logits[i].si, gold[i].si);
  }
  const double n = static_cast<double>(logits.size());
  l.evidence /= n;
  l.sa /= n;
  l.si /= n;
  return l;
}

double multitask_loss(const std::vector<TaskLogits>& logits, const std::vector<TaskGold>& gold,
                      const ClassWeights& weights, const LossConfig& config) {
  return task_losses(logits, gold, weights).total(config);
}

nn::Var example_loss(nn::Graph& g, const HeadVars& heads, const TaskGold& gold, const ClassWeights& weights,
                     const LossConfig& config, std::size_t batch_size) {
  const double inv = 1.0 / static_cast<double>(batch_size);
  auto loss = g.cross_entropy(heads.evidence, gold.evidence, weights.evidence.at(gold.evidence) * inv);
  if (config.alpha != 0.0) {
    loss = g.add(loss, g.cross_entropy(heads.sa, gold.sa, config.alpha * weights.sa.at(gold.sa) * inv));
  }
  if (config.beta != 0.0) {
    loss = g.add(loss, g.cross_entropy(heads.si, gold.si, config.beta * weights.si.at(gold.si) * inv));
  }
  return loss;
}

}  // namespace scaner::retriever
