#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scaner/common/jsonl.hpp"

namespace scaner::metrics {

// Rows are gold labels, columns are predicted labels.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;

  explicit ConfusionMatrix(std::vector<std::string> labels = {});
  // Throws DataError unless `counts` is square with one row per label.
  ConfusionMatrix(std::vector<std::string> labels, std::vector<std::vector<std::size_t>> counts);

  std::size_t size() const { return labels.size(); }
  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(std::size_t i) const;
  std::size_t column_sum(std::size_t j) const;

  Json to_json() const;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Throws DataError on a length mismatch or a value outside `labels`.
ConfusionMatrix confusion_matrix(const std::vector<std::string>& gold, const std::vector<std::string>& predicted,
                                 const std::vector<std::string>& labels);
ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& predicted,
                                 const std::vector<std::string>& labels);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the value was 0/0 and reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

std::vector<Prf> per_class_prf(const ConfusionMatrix& matrix);

// Unweighted mean over classes. Throws DataError on an empty list.
Prf macro_average(const std::vector<Prf>& per_class);

struct ClassMetrics {
  std::vector<std::string> labels;
  std::vector<Prf> per_class;
  Prf overall;
};

ClassMetrics class_metrics(const ConfusionMatrix& matrix);

// Half-up rounding to `digits` decimals, tolerant of binary representation
// error just below the half.
double round_half_up(double x, int digits = 2);

}  // namespace scaner::metrics
