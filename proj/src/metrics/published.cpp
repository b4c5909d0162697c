#include "scaner/metrics/published.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace scaner::metrics {

std::vector<PublishedTask> published_tasks() {
  std::vector<PublishedTask> out;
  const std::vector<std::string> sa{"Positive", "Neg_Unsure", "Neutral-SA"};
  const std::vector<std::string> si{"Positive", "Negative", "Neutral-SI"};

  out.push_back({"stay-sa",
                 ConfusionMatrix(sa, {{85, 4, 2}, {5, 11, 3}, {15, 8, 303}}),
                 {{"Positive", 0.81, 0.93, 0.87}, {"Neg_Unsure", 0.48, 0.58, 0.52}, {"Neutral-SA", 0.98, 0.93, 0.96}},
                 {"Overall", 0.76, 0.81, 0.78}});
  out.push_back({"stay-si",
                 ConfusionMatrix(si, {{41, 2, 1}, {27, 4, 4}, {15, 4, 338}}),
                 {{"Positive", 0.49, 0.93, 0.65}, {"Negative", 0.40, 0.11, 0.18}, {"Neutral-SI", 0.99, 0.95, 0.97}},
                 {"Overall", 0.63, 0.66, 0.60}});
  out.push_back({"paragraph-sa",
                 ConfusionMatrix(sa, {{1804, 285, 344}, {253, 118, 80}, {472, 204, 7314}}),
                 {{"Positive", 0.71, 0.74, 0.73}, {"Neg_Unsure", 0.19, 0.26, 0.22}, {"Neutral-SA", 0.95, 0.92, 0.93}},
                 {"Overall", 0.62, 0.64, 0.63}});
  out.push_back({"paragraph-si",
                 ConfusionMatrix(si, {{206, 69, 56}, {71, 87, 31}, {170, 73, 10111}}),
                 {{"Positive", 0.46, 0.62, 0.53}, {"Negative", 0.38, 0.46, 0.42}, {"Neutral-SI", 0.98, 0.99, 0.98}},
                 {"Overall", 0.61, 0.69, 0.64}});
  out.push_back({"evidence", std::nullopt, {{"Yes", 0.79, 0.87, 0.83}, {"No", 0.95, 0.91, 0.93}}, {"Overall", 0.87, 0.89, 0.88}});
  return out;
}

namespace {

void compare(ArithmeticReport& r, const std::string& task, const PublishedRow& published, const Prf& computed) {
  const std::array<std::pair<const char*, std::pair<double, double>>, 3> cells{{
      {"Precision", {published.precision, computed.precision}},
      {"Recall", {published.recall, computed.recall}},
      {"F1-score", {published.f1, computed.f1}},
  }};
  for (const auto& [column, values] : cells) {
    const double rounded = round_half_up(values.second);
    r.cells.push_back({task, published.label, column, values.first, rounded,
                       std::abs(rounded - values.first) < 1e-9});
  }
}

}  // namespace

bool ArithmeticReport::pass() const {
  for (const auto& c : cells) {
    if (!c.pass) return false;
  }
  return !cells.empty();
}

std::vector<CellCheck> ArithmeticReport::failures() const {
  std::vector<CellCheck> out;
  for (const auto& c : cells) {
    if (!c.pass) out.push_back(c);
  }
  return out;
}

Json ArithmeticReport::to_json() const {
  Json j;
  j["status"] = pass() ? "PASS" : "FAIL";
  Json rows = Json::array();
  for (const auto& c : cells) {
    rows.push_back({{"task", c.task}, {"label", c.label}, {"column", c.column}, {"published", c.published},
                    {"computed", c.computed}, {"pass", c.pass}});
  }
  j["cells"] = rows;
  return j;
}

std::string ArithmeticReport::to_text() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "published-arithmetic: " << (pass() ? "PASS" : "FAIL") << " (" << cells.size() - failures().size() << "/"
      << cells.size() << " cells)\n";
  for (const auto& c : failures()) {
    out << "  mismatch " << c.task << " " << c.label << " " << c.column << ": published " << c.published
        << ", computed " << c.computed << "\n";
  }
  return out.str();
}

ArithmeticReport check_matrix(const PublishedTask& task) {
  ArithmeticReport r;
  if (!task.matrix) return r;
  const auto m = class_metrics(*task.matrix);
  for (std::size_t i = 0; i < task.rows.size() && i < m.per_class.size(); ++i) {
    compare(r, task.task, task.rows[i], m.per_class[i]);
  }
  compare(r, task.task, task.overall, m.overall);
  return r;
}

ArithmeticReport check_macro_of_rows(const PublishedTask& task) {
  std::vector<Prf> rows;
  for (const auto& row : task.rows) rows.push_back({row.precision, row.recall, row.f1});
  ArithmeticReport r;
  compare(r, task.task, task.overall, macro_average(rows));
  return r;
}

ArithmeticReport published_arithmetic_check() {
  ArithmeticReport all;
  for (const auto& t : published_tasks()) {
    const auto r = t.matrix ? check_matrix(t) : check_macro_of_rows(t);
    all.cells.insert(all.cells.end(), r.cells.begin(), r.cells.end());
  }
  return all;
}

}  // namespace scaner::metrics
