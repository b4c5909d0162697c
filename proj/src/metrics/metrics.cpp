#include "scaner/metrics/metrics.hpp"

#include <cmath>

#include "scaner/common/error.hpp"

namespace scaner::metrics {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> l)
    : labels(std::move(l)), counts(labels.size(), std::vector<std::size_t>(labels.size(), 0)) {}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> l, std::vector<std::vector<std::size_t>> c)
    : labels(std::move(l)), counts(std::move(c)) {
  if (counts.size() != labels.size()) throw DataError("confusion matrix needs one row per label");
  for (const auto& row : counts) {
    if (row.size() != labels.size()) throw DataError("confusion matrix must be square");
  }
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < size(); ++i) t += counts[i][i];
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t i) const {
  std::size_t t = 0;
  for (auto c : counts.at(i)) t += c;
  return t;
}

std::size_t ConfusionMatrix::column_sum(std::size_t j) const {
  std::size_t t = 0;
  for (const auto& row : counts) t += row.at(j);
  return t;
}

Json ConfusionMatrix::to_json() const {
  Json j;
  j["labels"] = labels;
  j["counts"] = counts;
  return j;
}

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& predicted,
                                 const std::vector<std::string>& labels) {
  if (gold.size() != predicted.size()) {
    throw DataError("confusion matrix: " + std::to_string(gold.size()) + " gold labels but " +
                    std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix m(labels);
  for (std::size_t k = 0; k < gold.size(); ++k) {
    if (gold[k] >= labels.size() || predicted[k] >= labels.size()) {
      throw DataError("confusion matrix: label index out of range at position " + std::to_string(k));
    }
    ++m.counts[gold[k]][predicted[k]];
  }
  return m;
}

ConfusionMatrix confusion_matrix(const std::vector<std::string>& gold, const std::vector<std::string>& predicted,
                                 const std::vector<std::string>& labels) {
  if (gold.size() != predicted.size()) {
    throw DataError("confusion matrix: " + std::to_string(gold.size()) + " gold labels but " +
                    std::to_string(predicted.size()) + " predictions");
  }
  auto index = [&](const std::string& s) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == s) return i;
    }
    throw DataError("confusion matrix: unknown label '" + s + "'");
  };
  std::vector<std::size_t> g, p;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    g.push_back(index(gold[k]));
    p.push_back(index(predicted[k]));
  }
  return confusion_matrix(g, p, labels);
}

std::vector<Prf> per_class_prf(const ConfusionMatrix& matrix) {
  std::vector<Prf> out(matrix.size());
  for (std::size_t j = 0; j < matrix.size(); ++j) {
    auto& r = out[j];
    const double tp = static_cast<double>(matrix.counts[j][j]);
    const auto col = matrix.column_sum(j);
    const auto row = matrix.row_sum(j);
    r.precision_undefined = col == 0;
    r.recall_undefined = row == 0;
    r.precision = col == 0 ? 0.0 : tp / static_cast<double>(col);
    r.recall = row == 0 ? 0.0 : tp / static_cast<double>(row);
    r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  }
  return out;
}

Prf macro_average(const std::vector<Prf>& per_class) {
  if (per_class.empty()) throw DataError("macro average of zero classes");
  Prf m;
  for (const auto& c : per_class) {
    m.precision += c.precision;
    m.recall += c.recall;
    m.f1 += c.f1;
    m.precision_undefined |= c.precision_undefined;
    m.recall_undefined |= c.recall_undefined;
  }
  const double n = static_cast<double>(per_class.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

ClassMetrics class_metrics(const ConfusionMatrix& matrix) {
  ClassMetrics m;
  m.labels = matrix.labels;
  m.per_class = per_class_prf(matrix);
  if (!m.per_class.empty()) m.overall = macro_average(m.per_class);
  return m;
}

double round_half_up(double x, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::floor(x * scale + 0.5 + 1e-9) / scale;
}

}  // namespace scaner::metrics
