#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scaner/common/jsonl.hpp"
#include "scaner/corpus/types.hpp"

namespace scaner::corpus {

enum class SplitName { Train = 0, Validation = 1, Test = 2 };

std::string_view to_string(SplitName s);
SplitName parse_split_name(std::string_view s);

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;
};

struct DatasetSplit {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  const std::vector<std::string>& stays(SplitName s) const;
  // Throws DataError for unknown stay ids.
  SplitName split_of(const std::string& stay_id) const;
};

Json to_json(const DatasetSplit& split);
DatasetSplit split_from_json(const Json& j);

// Patient-level partition: all stays of a patient go to the same split.
// Patients are shuffled with `seed`, grouped by their stay-label signature,
// then dealt to the split whose stay count lags its target the most, so
// every label signature is spread across splits in proportion to the
// ratios. Stay ids inside each split keep corpus order.
DatasetSplit split_by_patient(const std::vector<HospitalStay>& stays, const SplitRatios& ratios, std::uint64_t seed);

// Removes floor(fraction * #no-evidence) no-evidence paragraphs chosen
// uniformly; order of the survivors is preserved.
std::vector<Paragraph> downsample_no_evidence(const std::vector<Paragraph>& paragraphs, double fraction,
                                              std::uint64_t seed);

}  // namespace scaner::corpus
