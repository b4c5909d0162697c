#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scaner/common/jsonl.hpp"
#include "scaner/common/labels.hpp"

namespace scaner::corpus {

struct ClinicalNote {
  std::string note_id;
  std::string patient_id;
  std::string stay_id;
  std::string category;
  std::string text;
};

struct HospitalStay {
  std::string stay_id;
  std::string patient_id;
  std::vector<std::string> note_ids;  // in corpus order
  SaLabel sa_label = SaLabel::Neutral;
  SiLabel si_label = SiLabel::Neutral;
};

// Half-open span [start, end) in code points of the note text.
struct EvidenceAnnotation {
  std::string note_id;
  std::size_t start = 0;
  std::size_t end = 0;
  EventType event = EventType::SA;
  std::optional<SaAnnotation> sa_label;  // iff event == SA
  std::optional<SiLabel> si_label;       // iff event == SI; never Neutral
  std::optional<SaMethod> method;        // SA only
};

struct Paragraph {
  std::string paragraph_id;
  std::string note_id;
  std::string stay_id;
  std::string patient_id;
  std::size_t first_sentence = 0;  // inclusive, over the note's sentence list
  std::size_t last_sentence = 0;   // inclusive
  std::string text;
  Evidence evidence = Evidence::No;
  Sa4 sa4 = Sa4::Neutral;
  SaLabel sa_label = SaLabel::Neutral;
  SiLabel si_label = SiLabel::Neutral;
};

// A loaded and validated corpus. Stays reference notes by id; note_ids of a
// stay are filled in from the notes file when the stays file leaves them out.
struct Corpus {
  std::vector<ClinicalNote> notes;
  std::vector<EvidenceAnnotation> annotations;
  std::vector<HospitalStay> stays;

  const ClinicalNote* find_note(const std::string& note_id) const;
  const HospitalStay* find_stay(const std::string& stay_id) const;

  // Checks every type invariant; throws DataError naming the offending id.
  void validate() const;

  // Fills HospitalStay::note_ids from notes (in note order).
  void link_notes();
};

// Wire formats (one JSON object per line).
Json to_json(const ClinicalNote& note);
Json to_json(const EvidenceAnnotation& ann);
Json to_json(const HospitalStay& stay);
Json to_json(const Paragraph& p);

ClinicalNote note_from_json(const Json& j);
EvidenceAnnotation annotation_from_json(const Json& j);
HospitalStay stay_from_json(const Json& j);
Paragraph paragraph_from_json(const Json& j);

struct CorpusPaths {
  std::filesystem::path notes;
  std::filesystem::path annotations;
  std::filesystem::path stays;

  static CorpusPaths in_directory(const std::filesystem::path& dir);
};

// Loads, links and validates. Annotations may be absent (unlabeled data);
// pass an empty path to skip the file.
Corpus load_corpus(const CorpusPaths& paths);
void save_corpus(const Corpus& corpus, const CorpusPaths& paths);

}  // namespace scaner::corpus
