#include "scaner/metrics/report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace scaner::metrics {

const std::vector<std::string>& report_task_order() {
  static const std::vector<std::string> order{"evidence", "paragraph-sa", "paragraph-si", "stay-sa", "stay-si"};
  return order;
}

const TaskReport* EvaluationReport::find(const std::string& task) const {
  for (const auto& t : tasks) {
    if (t.task == task) return &t;
  }
  return nullptr;
}

EvaluationReport evaluation_report(const std::vector<TaskData>& data) {
  EvaluationReport report;
  for (const auto& name : report_task_order()) {
    const auto it = std::find_if(data.begin(), data.end(), [&](const TaskData& d) { return d.task == name; });
    if (it == data.end()) {
      report.notices.push_back("task " + name + " omitted: no data");
      continue;
    }
    TaskReport t{name, confusion_matrix(it->gold, it->predicted, it->labels), {}};
    t.metrics = class_metrics(t.matrix);
    if (t.matrix.total() == 0) report.notices.push_back("task " + name + ": zero instances");
    for (std::size_t i = 0; i < t.metrics.per_class.size(); ++i) {
      const auto& c = t.metrics.per_class[i];
      if (c.precision_undefined) report.notices.push_back("task " + name + ": precision of " + t.metrics.labels[i] + " is 0/0, reported as 0");
      if (c.recall_undefined) report.notices.push_back("task " + name + ": recall of " + t.metrics.labels[i] + " is 0/0, reported as 0");
    }
    report.tasks.push_back(std::move(t));
  }
  return report;
}

namespace {

Json prf_json(const Prf& p) {
  Json j;
  j["precision"] = p.precision;
  j["recall"] = p.recall;
  j["f1"] = p.f1;
  if (p.precision_undefined) j["precision_undefined"] = true;
  if (p.recall_undefined) j["recall_undefined"] = true;
  return j;
}

}  // namespace

Json EvaluationReport::to_json() const {
  Json j;
  j["columns"] = {"Precision", "Recall", "F1-score"};
  Json tj = Json::object();
  for (const auto& t : tasks) {
    Json entry;
    entry["instances"] = t.matrix.total();
    entry["confusion_matrix"] = t.matrix.to_json();
    Json per = Json::array();
    for (std::size_t i = 0; i < t.metrics.per_class.size(); ++i) {
      Json row = prf_json(t.metrics.per_class[i]);
      row["label"] = t.metrics.labels[i];
      per.push_back(row);
    }
    entry["per_class"] = per;
    entry["overall"] = prf_json(t.metrics.overall);
    tj[t.task] = entry;
  }
  j["tasks"] = tj;
  j["notices"] = notices;
  if (arithmetic) j["published_arithmetic"] = arithmetic->to_json();
  return j;
}

std::string EvaluationReport::to_text() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  for (const auto& t : tasks) {
    std::size_t width = 8;
    for (const auto& l : t.metrics.labels) width = std::max(width, l.size());
    width += 2;
    out << "== " << t.task << " (" << t.matrix.total() << " instances) ==\n";
    out << std::left << std::setw(static_cast<int>(width)) << "Labels" << std::right << std::setw(11) << "Precision"
        << std::setw(9) << "Recall" << std::setw(10) << "F1-score" << "\n";
    auto row = [&](const std::string& label, const Prf& p) {
      out << std::left << std::setw(static_cast<int>(width)) << label << std::right << std::setw(11)
          << round_half_up(p.precision) << std::setw(9) << round_half_up(p.recall) << std::setw(10)
          << round_half_up(p.f1) << "\n";
    };
    for (std::size_t i = 0; i < t.metrics.per_class.size(); ++i) row(t.metrics.labels[i], t.metrics.per_class[i]);
    row("Overall", t.metrics.overall);
    out << "confusion (rows gold, columns predicted):\n";
    out << std::left << std::setw(static_cast<int>(width)) << "";
    for (const auto& l : t.matrix.labels) out << std::right << std::setw(static_cast<int>(std::max<std::size_t>(l.size(), 6) + 2)) << l;
    out << "\n";
    for (std::size_t i = 0; i < t.matrix.size(); ++i) {
      out << std::left << std::setw(static_cast<int>(width)) << t.matrix.labels[i];
      for (std::size_t k = 0; k < t.matrix.size(); ++k) {
        out << std::right << std::setw(static_cast<int>(std::max<std::size_t>(t.matrix.labels[k].size(), 6) + 2))
            << t.matrix.counts[i][k];
      }
      out << "\n";
    }
    out << "\n";
  }
  for (const auto& n : notices) out << "notice: " << n << "\n";
  if (arithmetic) out << arithmetic->to_text();
  return out.str();
}

}  // namespace scaner::metrics
