#include "scaner/predictor/noise.hpp"

#include <algorithm>
#include <map>

#include "scaner/common/error.hpp"

namespace scaner::predictor {

CountDistribution::CountDistribution(std::vector<std::pair<std::size_t, double>> masses) {
  std::map<std::size_t, double> merged;
  double total = 0.0;
  for (const auto& [count, w] : masses) {
    if (count == 0) throw DataError("count distribution support must be positive");
    if (!(w > 0.0)) throw DataError("count distribution weights must be positive");
    merged[count] += w;
    total += w;
  }
  for (const auto& [count, w] : merged) masses_.emplace_back(count, w / total);
}

double CountDistribution::probability(std::size_t count) const {
  for (const auto& [c, p] : masses_) {
    if (c == count) return p;
  }
  return 0.0;
}

double CountDistribution::mean() const {
  double m = 0.0;
  for (const auto& [c, p] : masses_) m += static_cast<double>(c) * p;
  return m;
}

std::size_t CountDistribution::sample(Rng& rng) const {
  if (masses_.empty()) throw DataError("cannot sample from an empty count distribution");
  std::vector<double> w;
  for (const auto& m : masses_) w.push_back(m.second);
  return masses_[rng.categorical(w)].first;
}

Json CountDistribution::to_json() const {
  Json j = Json::array();
  for (const auto& [c, p] : masses_) j.push_back({{"count", c}, {"probability", p}});
  return j;
}

CountDistribution CountDistribution::from_json(const Json& j) {
  if (!j.is_array()) throw DataError("count distribution must be a JSON array");
  std::vector<std::pair<std::size_t, double>> m;
  for (const auto& e : j) m.emplace_back(e.at("count").get<std::size_t>(), e.at("probability").get<double>());
  return CountDistribution(std::move(m));
}

CountDistribution build_neutral_count_distribution(const std::vector<std::size_t>& evidence_counts) {
  std::map<std::size_t, double> hist;
  for (auto c : evidence_counts) {
    if (c > 0) hist[c] += 1.0;
  }
  if (hist.empty()) throw DataError("neutral count distribution needs a non-neutral stay with evidence");
  return CountDistribution(std::vector<std::pair<std::size_t, double>>(hist.begin(), hist.end()));
}

void NoiseConfig::validate() const {
  if (!(irrelevant_prob >= 0.0 && irrelevant_prob <= 1.0)) throw ConfigError("irrelevant_prob must be in [0, 1]");
}

std::vector<std::size_t> sample_paragraphs(const std::vector<std::size_t>& available, const CountDistribution& counts,
                                           Rng& rng) {
  if (available.empty()) throw DataError("no paragraphs to sample from");
  const auto x = std::min(counts.sample(rng), available.size());
  std::vector<std::size_t> out;
  for (auto i : rng.sample_without_replacement(available.size(), x)) out.push_back(available[i]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> assemble_training_input(const std::vector<std::size_t>& evidence,
                                                 const std::vector<std::size_t>& pool, const NoiseConfig& config,
                                                 Rng& rng) {
  if (evidence.empty()) return sample_paragraphs(pool, config.neutral_counts, rng);
  std::vector<std::size_t> out = evidence;
  for (auto p : pool) {
    if (rng.bernoulli(config.irrelevant_prob)) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace scaner::predictor
