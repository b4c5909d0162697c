#include "scaner/corpus/types.hpp"

#include <set>
#include <unordered_map>

#include "scaner/common/error.hpp"
#include "scaner/common/utf8.hpp"

namespace scaner::corpus {

const ClinicalNote* Corpus::find_note(const std::string& note_id) const {
  for (const auto& n : notes) {
    if (n.note_id == note_id) return &n;
  }
  return nullptr;
}

const HospitalStay* Corpus::find_stay(const std::string& stay_id) const {
  for (const auto& s : stays) {
    if (s.stay_id == stay_id) return &s;
  }
  return nullptr;
}

void Corpus::link_notes() {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < stays.size(); ++i) {
    stays[i].note_ids.clear();
    index.emplace(stays[i].stay_id, i);
  }
  for (const auto& n : notes) {
    auto it = index.find(n.stay_id);
    if (it != index.end()) stays[it->second].note_ids.push_back(n.note_id);
  }
}

void Corpus::validate() const {
  std::unordered_map<std::string, std::size_t> note_lengths;
  for (const auto& n : notes) {
    if (n.note_id.empty()) throw DataError("note with empty note_id");
    if (n.text.empty()) throw DataError("note '" + n.note_id + "' has empty text");
    if (n.stay_id.empty()) throw DataError("note '" + n.note_id + "' has no stay_id");
    if (!note_lengths.emplace(n.note_id, utf8::length(n.text)).second) {
      throw DataError("duplicate note_id '" + n.note_id + "'");
    }
  }

  std::unordered_map<std::string, const HospitalStay*> stay_index;
  for (const auto& s : stays) {
    if (!stay_index.emplace(s.stay_id, &s).second) throw DataError("duplicate stay_id '" + s.stay_id + "'");
  }
  for (const auto& n : notes) {
    auto it = stay_index.find(n.stay_id);
    if (it == stay_index.end()) {
      throw DataError("note '" + n.note_id + "' references unknown stay_id '" + n.stay_id + "'");
    }
    if (it->second->patient_id != n.patient_id) {
      throw DataError("note '" + n.note_id + "' patient_id does not match stay '" + n.stay_id + "'");
    }
  }
  for (const auto& s : stays) {
    for (const auto& id : s.note_ids) {
      if (!note_lengths.count(id)) {
        throw DataError("stay '" + s.stay_id + "' references unknown note_id '" + id + "'");
      }
    }
  }

  for (const auto& a : annotations) {
    auto it = note_lengths.find(a.note_id);
    if (it == note_lengths.end()) throw DataError("annotation references unknown note_id '" + a.note_id + "'");
    if (!(a.start < a.end) || a.end > it->second) {
      throw DataError("annotation span [" + std::to_string(a.start) + ", " + std::to_string(a.end) +
                      ") out of range for note '" + a.note_id + "'");
    }
    if (a.event == EventType::SA) {
      if (!a.sa_label || a.si_label) throw DataError("SA annotation in '" + a.note_id + "' needs exactly an SA label");
    } else {
      if (!a.si_label || a.sa_label) throw DataError("SI annotation in '" + a.note_id + "' needs exactly an SI label");
      if (*a.si_label == SiLabel::Neutral) throw DataError("SI annotation in '" + a.note_id + "' cannot be neutral");
      if (a.method) throw DataError("SI annotation in '" + a.note_id + "' cannot carry a method");
    }
  }
}

Json to_json(const ClinicalNote& note) {
  Json j;
  j["note_id"] = note.note_id;
  j["patient_id"] = note.patient_id;
  j["stay_id"] = note.stay_id;
  j["category"] = note.category;
  j["text"] = note.text;
  return j;
}

Json to_json(const EvidenceAnnotation& ann) {
  Json j;
  j["note_id"] = ann.note_id;
  j["start"] = ann.start;
  j["end"] = ann.end;
  j["event"] = to_string(ann.event);
  if (ann.event == EventType::SA && ann.sa_label) {
    j["label"] = to_string(*ann.sa_label);
  } else if (ann.si_label) {
    j["label"] = to_string(*ann.si_label);
  }
  if (ann.method) j["method"] = to_string(*ann.method);
  return j;
}

Json to_json(const HospitalStay& stay) {
  Json j;
  j["stay_id"] = stay.stay_id;
  j["patient_id"] = stay.patient_id;
  j["sa_label"] = to_string(stay.sa_label);
  j["si_label"] = to_string(stay.si_label);
  return j;
}

Json to_json(const Paragraph& p) {
  Json j;
  j["paragraph_id"] = p.paragraph_id;
  j["note_id"] = p.note_id;
  j["stay_id"] = p.stay_id;
  j["patient_id"] = p.patient_id;
  j["sentence_range"] = Json::array({p.first_sentence, p.last_sentence});
  j["evidence"] = to_string(p.evidence);
  j["sa_label"] = to_string(p.sa_label);
  j["sa_label_4way"] = to_string(p.sa4);
  j["si_label"] = to_string(p.si_label);
  j["text"] = p.text;
  return j;
}

ClinicalNote note_from_json(const Json& j) {
  ClinicalNote n;
  n.note_id = require_string(j, "note_id");
  n.patient_id = require_string(j, "patient_id");
  n.stay_id = require_string(j, "stay_id");
  n.category = j.contains("category") ? require_string(j, "category") : std::string{};
  n.text = require_string(j, "text");
  return n;
}

EvidenceAnnotation annotation_from_json(const Json& j) {
  EvidenceAnnotation a;
  a.note_id = require_string(j, "note_id");
  const long long start = require_int(j, "start");
  const long long end = require_int(j, "end");
  if (start < 0 || end < 0) throw DataError("annotation offsets must be non-negative");
  a.start = static_cast<std::size_t>(start);
  a.end = static_cast<std::size_t>(end);
  a.event = parse_event_type(require_string(j, "event"));
  const std::string label = require_string(j, "label");
  if (a.event == EventType::SA) {
    a.sa_label = parse_sa_annotation(label);
  } else {
    a.si_label = parse_si_label(label);
    if (*a.si_label == SiLabel::Neutral) throw DataError("SI annotation label must be positive or negative");
  }
  if (j.contains("method") && !j["method"].is_null()) {
    if (a.event != EventType::SA) throw DataError("method is only valid for SA annotations");
    a.method = parse_sa_method(require_string(j, "method"));
  }
  return a;
}

HospitalStay stay_from_json(const Json& j) {
  HospitalStay s;
  s.stay_id = require_string(j, "stay_id");
  s.patient_id = require_string(j, "patient_id");
  s.sa_label = parse_sa_label(require_string(j, "sa_label"));
  s.si_label = parse_si_label(require_string(j, "si_label"));
  return s;
}

Paragraph paragraph_from_json(const Json& j) {
  Paragraph p;
  p.paragraph_id = require_string(j, "paragraph_id");
  p.note_id = require_string(j, "note_id");
  p.stay_id = require_string(j, "stay_id");
  p.patient_id = require_string(j, "patient_id");
  const auto& range = j.at("sentence_range");
  if (!range.is_array() || range.size() != 2) throw DataError("sentence_range must be [first, last]");
  p.first_sentence = range[0].get<std::size_t>();
  p.last_sentence = range[1].get<std::size_t>();
  p.evidence = parse_evidence(require_string(j, "evidence"));
  p.sa_label = parse_sa_label(require_string(j, "sa_label"));
  p.sa4 = parse_sa4(require_string(j, "sa_label_4way"));
  p.si_label = parse_si_label(require_string(j, "si_label"));
  p.text = require_string(j, "text");
  return p;
}

CorpusPaths CorpusPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "notes.jsonl", dir / "annotations.jsonl", dir / "stays.jsonl"};
}

Corpus load_corpus(const CorpusPaths& paths) {
  Corpus corpus;
  read_jsonl(paths.notes, [&](const Json& j, std::size_t) { corpus.notes.push_back(note_from_json(j)); });
  if (!paths.annotations.empty()) {
    read_jsonl(paths.annotations,
               [&](const Json& j, std::size_t) { corpus.annotations.push_back(annotation_from_json(j)); });
  }
  if (!paths.stays.empty()) {
    read_jsonl(paths.stays, [&](const Json& j, std::size_t) { corpus.stays.push_back(stay_from_json(j)); });
  } else {
    // Unlabeled input: one neutral placeholder stay per distinct stay_id.
    std::set<std::string> seen;
    for (const auto& n : corpus.notes) {
      if (seen.insert(n.stay_id).second) corpus.stays.push_back({n.stay_id, n.patient_id, {}, {}, {}});
    }
  }
  corpus.link_notes();
  corpus.validate();
  return corpus;
}

void save_corpus(const Corpus& corpus, const CorpusPaths& paths) {
  std::vector<Json> rows;
  rows.reserve(corpus.notes.size());
  for (const auto& n : corpus.notes) rows.push_back(to_json(n));
  write_jsonl(paths.notes, rows);
  rows.clear();
  for (const auto& a : corpus.annotations) rows.push_back(to_json(a));
  write_jsonl(paths.annotations, rows);
  rows.clear();
  for (const auto& s : corpus.stays) rows.push_back(to_json(s));
  write_jsonl(paths.stays, rows);
}

}  // namespace scaner::corpus
