#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "scaner/common/error.hpp"
#include "scaner/common/rng.hpp"
#include "scaner/metrics/metrics.hpp"
#include "scaner/metrics/published.hpp"
#include "scaner/metrics/report.hpp"

using namespace scaner;
using namespace scaner::metrics;

namespace {

// Expands a matrix back into (gold, predicted) index sequences.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> expand(const std::vector<std::vector<std::size_t>>& m) {
  std::vector<std::size_t> g, p;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      for (std::size_t k = 0; k < m[i][j]; ++k) {
        g.push_back(i);
        p.push_back(j);
      }
    }
  }
  return {g, p};
}

// Precision/recall straight from the sequences, one class at a time.
Prf brute_prf(const std::vector<std::size_t>& g, const std::vector<std::size_t>& p, std::size_t c) {
  double tp = 0, pred = 0, gold = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    tp += g[k] == c && p[k] == c;
    pred += p[k] == c;
    gold += g[k] == c;
  }
  Prf r;
  r.precision = pred > 0 ? tp / pred : 0.0;
  r.recall = gold > 0 ? tp / gold : 0.0;
  r.f1 = tp > 0 ? 2 * tp / (pred + gold) : 0.0;
  return r;
}

const PublishedTask& task(const std::string& name) {
  static const auto tasks = published_tasks();
  return *std::find_if(tasks.begin(), tasks.end(), [&](const PublishedTask& t) { return t.task == name; });
}

}  // namespace

TEST_CASE("identical gold and predictions give a diagonal matrix") {
  const std::vector<std::string> labels{"a", "b", "c"};
  const std::vector<std::string> seq{"a", "c", "c", "b", "a"};
  const auto m = confusion_matrix(seq, seq, labels);
  CHECK(m.counts == std::vector<std::vector<std::size_t>>{{2, 0, 0}, {0, 1, 0}, {0, 0, 2}});
  for (const auto& c : per_class_prf(m)) {
    CHECK(c.precision == 1.0);
    CHECK(c.recall == 1.0);
    CHECK(c.f1 == 1.0);
  }
}

TEST_CASE("empty sequences give a zero matrix") {
  const auto m = confusion_matrix(std::vector<std::string>{}, {}, {"a", "b"});
  CHECK(m.total() == 0);
  const auto prf = per_class_prf(m);
  CHECK(prf[0].precision == 0.0);
  CHECK(prf[0].precision_undefined);
  CHECK(prf[0].recall_undefined);
}

TEST_CASE("confusion matrix errors") {
  CHECK_THROWS_AS(confusion_matrix(std::vector<std::string>{"a"}, {}, {"a"}), DataError);
  CHECK_THROWS_AS(confusion_matrix(std::vector<std::string>{"a"}, {"z"}, {"a"}), DataError);
  CHECK_THROWS_AS(ConfusionMatrix({"a", "b"}, {{1, 2}}), DataError);
}

TEST_CASE("stay-level SA matrix rebuilt from its implied label sequences") {
  const auto& published = task("stay-sa").matrix->counts;
  const auto [g, p] = expand(published);
  const auto m = confusion_matrix(g, p, {"Positive", "Neg_Unsure", "Neutral-SA"});
  CHECK(m.counts == published);
  CHECK(m.total() == 436);
}

TEST_CASE("per-class metrics match a brute-force count on random sequences") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t classes = static_cast<std::size_t>(rng.uniform_int(1, 5));
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(0, 60));
    std::vector<std::size_t> g, p;
    for (std::size_t k = 0; k < n; ++k) {
      g.push_back(static_cast<std::size_t>(rng.uniform_int(0, classes - 1)));
      p.push_back(static_cast<std::size_t>(rng.uniform_int(0, classes - 1)));
    }
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < classes; ++c) labels.push_back("c" + std::to_string(c));
    const auto m = confusion_matrix(g, p, labels);
    const auto prf = per_class_prf(m);
    double weighted_recall = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      const auto b = brute_prf(g, p, c);
      CHECK(prf[c].precision == doctest::Approx(b.precision).epsilon(1e-12));
      CHECK(prf[c].recall == doctest::Approx(b.recall).epsilon(1e-12));
      CHECK(prf[c].f1 == doctest::Approx(b.f1).epsilon(1e-12));
      weighted_recall += prf[c].recall * static_cast<double>(m.row_sum(c));
    }
    CHECK(weighted_recall == doctest::Approx(static_cast<double>(m.trace())).epsilon(1e-9));
    CHECK(m.total() == n);
  }
}

TEST_CASE("macro average is an unweighted mean, order-free") {
  const std::vector<Prf> f{{0, 0, 0.87}, {0, 0, 0.52}, {0, 0, 0.96}};
  CHECK(round_half_up(macro_average(f).f1) == doctest::Approx(0.78));
  const std::vector<Prf> p{{0.79, 0, 0}, {0.95, 0, 0}};
  CHECK(round_half_up(macro_average(p).precision) == doctest::Approx(0.87));
  CHECK(macro_average({{0.3, 0.4, 0.5}}).recall == 0.4);
  auto g = f;
  std::reverse(g.begin(), g.end());
  CHECK(macro_average(g).f1 == doctest::Approx(macro_average(f).f1).epsilon(1e-15));
  CHECK(macro_average({{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}}).f1 == 0.5);
  CHECK_THROWS_AS(macro_average({}), DataError);
}

TEST_CASE("round half up") {
  CHECK(round_half_up(0.125) == doctest::Approx(0.13));
  CHECK(round_half_up(0.124999) == doctest::Approx(0.12));
  CHECK(round_half_up(85.0 / 91.0) == doctest::Approx(0.93));
  CHECK(round_half_up(0.805) == doctest::Approx(0.81));
}

TEST_CASE("published stay-level matrices reproduce their metric tables") {
  CHECK(check_matrix(task("stay-sa")).pass());
  CHECK(check_matrix(task("stay-si")).pass());
  CHECK(check_matrix(task("paragraph-sa")).pass());
  const auto m = class_metrics(*task("stay-sa").matrix);
  CHECK(round_half_up(m.per_class[0].recall) == doctest::Approx(0.93));
  CHECK(round_half_up(m.per_class[0].precision) == doctest::Approx(0.81));
}

TEST_CASE("paragraph SI matrix: neutral cells computed from their fractions") {
  const auto r = check_matrix(task("paragraph-si"));
  const auto fails = r.failures();
  REQUIRE(fails.size() == 2);
  for (const auto& c : fails) CHECK(c.label == "Neutral-SI");
  const double p = 10111.0 / (56 + 31 + 10111);
  const double rec = 10111.0 / (170 + 73 + 10111);
  CHECK(fails[0].computed == doctest::Approx(round_half_up(p)));
  CHECK(fails[1].computed == doctest::Approx(round_half_up(rec)));
}

TEST_CASE("evidence overall row is the mean of its per-class rows") {
  CHECK(check_macro_of_rows(task("evidence")).pass());
}

TEST_CASE("evaluation report omits missing tasks with a notice") {
  TaskData evidence{"evidence", {"Yes", "No"}, {0, 1, 1, 0}, {0, 1, 0, 0}};
  const auto r = evaluation_report({evidence});
  CHECK(r.tasks.size() == 1);
  CHECK(r.notices.size() == 4);
  const auto text = r.to_text();
  CHECK(text.find("Precision") < text.find("Recall"));
  CHECK(text.find("Recall") < text.find("F1-score"));
  const auto j = r.to_json();
  CHECK(j["columns"] == Json({"Precision", "Recall", "F1-score"}));
  CHECK(j["tasks"]["evidence"]["instances"] == 4);
  CHECK(r.to_json().dump() == j.dump());
}

TEST_CASE("evaluation report with zero instances") {
  TaskData empty{"stay-sa", {"Positive", "Neg_Unsure", "Neutral-SA"}, {}, {}};
  const auto r = evaluation_report({empty});
  REQUIRE(r.find("stay-sa") != nullptr);
  CHECK(r.find("stay-sa")->matrix.total() == 0);
  CHECK(std::any_of(r.notices.begin(), r.notices.end(),
                    [](const std::string& n) { return n.find("zero instances") != std::string::npos; }));
}
