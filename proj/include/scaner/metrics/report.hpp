#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scaner/metrics/metrics.hpp"
#include "scaner/metrics/published.hpp"

namespace scaner::metrics {

// Aligned gold/predicted class indices for one task.
struct TaskData {
  std::string task;
  std::vector<std::string> labels;
  std::vector<std::size_t> gold;
  std::vector<std::size_t> predicted;
};

struct TaskReport {
  std::string task;
  ConfusionMatrix matrix;
  ClassMetrics metrics;
};

struct EvaluationReport {
  std::vector<TaskReport> tasks;
  std::vector<std::string> notices;
  std::optional<ArithmeticReport> arithmetic;

  const TaskReport* find(const std::string& task) const;
  Json to_json() const;
  std::string to_text() const;
};

const std::vector<std::string>& report_task_order();

// Builds one section per task in report_task_order(). Tasks without data
// are omitted with a notice; tasks with zero instances keep an empty
// section plus a notice.
EvaluationReport evaluation_report(const std::vector<TaskData>& data);

}  // namespace scaner::metrics
