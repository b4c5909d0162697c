#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "scaner/common/jsonl.hpp"
#include "scaner/common/rng.hpp"

namespace scaner::predictor {

// Empirical distribution over evidence-paragraph counts (positive integers).
class CountDistribution {
 public:
  CountDistribution() = default;
  // Throws DataError unless the support is positive and the weights are
  // positive.
  explicit CountDistribution(std::vector<std::pair<std::size_t, double>> masses);

  const std::vector<std::pair<std::size_t, double>>& masses() const { return masses_; }
  bool empty() const { return masses_.empty(); }
  double probability(std::size_t count) const;
  double mean() const;
  std::size_t sample(Rng& rng) const;

  Json to_json() const;
  static CountDistribution from_json(const Json& j);
  friend bool operator==(const CountDistribution&, const CountDistribution&) = default;

 private:
  std::vector<std::pair<std::size_t, double>> masses_;  // ascending count, normalized
};

// Normalized histogram of the evidence counts of non-neutral stays. Counts
// of zero are skipped. Throws DataError if no count is positive.
CountDistribution build_neutral_count_distribution(const std::vector<std::size_t>& evidence_counts);

struct NoiseConfig {
  double irrelevant_prob = 0.05;
  CountDistribution neutral_counts;

  void validate() const;
};

// Positions (into a stay's note/window-ordered paragraph list) fed to the
// predictor during training. A stay with gold evidence gets all of it plus
// each pool position with probability irrelevant_prob. A stay without
// evidence gets X distinct pool positions, X drawn from neutral_counts and
// clamped to the pool size. The result is sorted. Throws DataError for an
// evidence-free stay with an empty pool.
std::vector<std::size_t> assemble_training_input(const std::vector<std::size_t>& evidence,
                                                 const std::vector<std::size_t>& pool, const NoiseConfig& config,
                                                 Rng& rng);

// X distinct positions out of `available`, X from `counts` clamped to the
// size. Sorted. Throws DataError if `available` is empty.
std::vector<std::size_t> sample_paragraphs(const std::vector<std::size_t>& available, const CountDistribution& counts,
                                           Rng& rng);

}  // namespace scaner::predictor
