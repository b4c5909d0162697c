#include "scaner/corpus/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "scaner/common/error.hpp"
#include "scaner/common/rng.hpp"

namespace scaner::corpus {

std::string_view to_string(SplitName s) {
  switch (s) {
    case SplitName::Train: return "train";
    case SplitName::Validation: return "validation";
    case SplitName::Test: return "test";
  }
  return "?";
}

SplitName parse_split_name(std::string_view s) {
  if (s == "train") return SplitName::Train;
  if (s == "validation") return SplitName::Validation;
  if (s == "test") return SplitName::Test;
  throw ConfigError("unknown split '" + std::string(s) + "' (expected train, validation or test)");
}

const std::vector<std::string>& DatasetSplit::stays(SplitName s) const {
  switch (s) {
    case SplitName::Train: return train;
    case SplitName::Validation: return validation;
    case SplitName::Test: return test;
  }
  return train;
}

SplitName DatasetSplit::split_of(const std::string& stay_id) const {
  for (auto s : {SplitName::Train, SplitName::Validation, SplitName::Test}) {
    const auto& ids = stays(s);
    if (std::find(ids.begin(), ids.end(), stay_id) != ids.end()) return s;
  }
  throw DataError("stay '" + stay_id + "' is not in any split");
}

Json to_json(const DatasetSplit& split) {
  Json j;
  j["seed"] = split.seed;
  j["train"] = split.train;
  j["validation"] = split.validation;
  j["test"] = split.test;
  return j;
}

DatasetSplit split_from_json(const Json& j) {
  DatasetSplit s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.validation = j.at("validation").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed splits file: ") + e.what());
  }
  return s;
}

DatasetSplit split_by_patient(const std::vector<HospitalStay>& stays, const SplitRatios& ratios, std::uint64_t seed) {
  const std::array<double, 3> r{ratios.train, ratios.validation, ratios.test};
  for (double v : r) {
    if (!(v > 0.0)) throw ConfigError("split ratios must be positive");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

  struct Patient {
    std::string id;
    std::size_t stays = 0;
    std::string signature;
  };
  std::vector<Patient> patients;
  std::unordered_map<std::string, std::size_t> index;
  std::unordered_map<std::string, std::vector<std::string>> labels;
  for (const auto& s : stays) {
    auto [it, inserted] = index.emplace(s.patient_id, patients.size());
    if (inserted) patients.push_back({s.patient_id, 0, {}});
    ++patients[it->second].stays;
    labels[s.patient_id].push_back(std::string(to_string(s.sa_label)) + "|" + std::string(to_string(s.si_label)));
  }
  if (patients.size() < 3) {
    throw DataError("need at least 3 patients to split, got " + std::to_string(patients.size()));
  }
  for (auto& p : patients) {
    auto& l = labels[p.id];
    std::sort(l.begin(), l.end());
    for (const auto& x : l) p.signature += x + ";";
  }

  Rng rng(seed);
  rng.shuffle(patients);
  std::stable_sort(patients.begin(), patients.end(),
                   [](const Patient& a, const Patient& b) { return a.signature < b.signature; });

  std::array<double, 3> assigned{};
  std::array<std::size_t, 3> patient_counts{};
  std::unordered_map<std::string, std::size_t> split_of_patient;
  double placed = 0.0;
  for (const auto& p : patients) {
    const double after = placed + static_cast<double>(p.stays);
    std::size_t best = 0;
    double best_deficit = -1e300;
    for (std::size_t k = 0; k < 3; ++k) {
      const double deficit = r[k] * after - assigned[k];
      if (deficit > best_deficit + 1e-12) {
        best_deficit = deficit;
        best = k;
      }
    }
    assigned[best] += static_cast<double>(p.stays);
    ++patient_counts[best];
    split_of_patient[p.id] = best;
    placed = after;
  }

  // Every split gets at least one patient: move one from the largest split.
  for (std::size_t k = 0; k < 3; ++k) {
    if (patient_counts[k] != 0) continue;
    const auto donor = static_cast<std::size_t>(
        std::max_element(patient_counts.begin(), patient_counts.end()) - patient_counts.begin());
    for (auto it = patients.rbegin(); it != patients.rend(); ++it) {
      if (split_of_patient[it->id] == donor) {
        split_of_patient[it->id] = k;
        --patient_counts[donor];
        ++patient_counts[k];
        break;
      }
    }
  }

  DatasetSplit split;
  split.seed = seed;
  for (const auto& s : stays) {
    switch (split_of_patient[s.patient_id]) {
      case 0: split.train.push_back(s.stay_id); break;
      case 1: split.validation.push_back(s.stay_id); break;
      default: split.test.push_back(s.stay_id); break;
    }
  }
  return split;
}

std::vector<Paragraph> downsample_no_evidence(const std::vector<Paragraph>& paragraphs, double fraction,
                                              std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("down-sampling fraction must be in [0, 1]");
  std::vector<std::size_t> no_evidence;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (paragraphs[i].evidence == Evidence::No) no_evidence.push_back(i);
  }
  const auto remove_count =
      static_cast<std::size_t>(std::floor(fraction * static_cast<double>(no_evidence.size()) + 1e-9));
  Rng rng(seed);
  std::vector<bool> drop(paragraphs.size(), false);
  for (std::size_t k : rng.sample_without_replacement(no_evidence.size(), remove_count)) drop[no_evidence[k]] = true;
  std::vector<Paragraph> kept;
  kept.reserve(paragraphs.size() - remove_count);
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (!drop[i]) kept.push_back(paragraphs[i]);
  }
  return kept;
}

}  // namespace scaner::corpus
