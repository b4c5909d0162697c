#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "scaner/common/jsonl.hpp"
#include "scaner/corpus/split.hpp"
#include "scaner/corpus/types.hpp"

namespace scaner::corpus {

struct ParagraphCounts {
  std::array<std::size_t, 2> evidence{};  // yes, no
  std::array<std::size_t, 4> sa4{};       // positive, negative, unsure, neutral
  std::array<std::size_t, 3> sa{};        // positive, neg_unsure, neutral
  std::array<std::size_t, 3> si{};        // positive, negative, neutral

  void add(const Paragraph& p);
  std::size_t total() const { return evidence[0] + evidence[1]; }
  friend bool operator==(const ParagraphCounts&, const ParagraphCounts&) = default;
};

struct StayCounts {
  std::array<std::size_t, 3> sa{};
  std::array<std::size_t, 3> si{};

  void add(const HospitalStay& s);
  std::size_t total() const { return sa[0] + sa[1] + sa[2]; }
  friend bool operator==(const StayCounts&, const StayCounts&) = default;
};

struct AnnotationCounts {
  std::array<std::size_t, 3> sa{};  // positive, negative, unsure
  std::array<std::size_t, 2> si{};  // positive, negative
  std::map<std::string, std::size_t> sa_methods;

  std::size_t total() const { return sa[0] + sa[1] + sa[2] + si[0] + si[1]; }
};

struct StatsReport {
  std::size_t patients = 0;
  std::size_t stays = 0;
  std::size_t notes = 0;
  // Keyed by split name ("train", "validation", "test"), or "all" when no
  // split is supplied.
  std::map<std::string, ParagraphCounts> paragraphs;
  std::map<std::string, StayCounts> stay_labels;
  AnnotationCounts annotations;

  Json to_json() const;
  std::string to_text() const;
};

// Paragraphs must carry stay ids. With a split, counts are grouped by split
// and paragraphs or stays outside the split are reported under "unassigned".
StatsReport corpus_stats(const Corpus& corpus, const std::vector<Paragraph>& paragraphs,
                         const DatasetSplit* split = nullptr);

}  // namespace scaner::corpus
