#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scaner/metrics/metrics.hpp"

namespace scaner::metrics {

// Published two-decimal figures for one task.
struct PublishedRow {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PublishedTask {
  std::string task;  // "stay-sa", "stay-si", "paragraph-sa", "paragraph-si", "evidence"
  std::optional<ConfusionMatrix> matrix;  // absent when only the metrics were published
  std::vector<PublishedRow> rows;
  PublishedRow overall;
};

// The reference results: stay-level and paragraph-level confusion
// matrices with their metric tables, and the evidence metrics.
std::vector<PublishedTask> published_tasks();

struct CellCheck {
  std::string task;
  std::string label;   // class name or "Overall"
  std::string column;  // "Precision", "Recall" or "F1-score"
  double published = 0.0;
  double computed = 0.0;
  bool pass = false;
};

struct ArithmeticReport {
  std::vector<CellCheck> cells;

  bool pass() const;
  std::vector<CellCheck> failures() const;
  Json to_json() const;
  std::string to_text() const;
};

// Per-class cells from the confusion matrix (rounded half-up to 2 dp) and the
// Overall row from the unrounded macro mean.
ArithmeticReport check_matrix(const PublishedTask& task);

// Overall row as the mean of the published per-class values.
ArithmeticReport check_macro_of_rows(const PublishedTask& task);

// Every matrix-backed task through check_matrix plus the evidence task
// through check_macro_of_rows.
ArithmeticReport published_arithmetic_check();

}  // namespace scaner::metrics
