#include "scaner/corpus/stats.hpp"

#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>

namespace scaner::corpus {

void ParagraphCounts::add(const Paragraph& p) {
  ++evidence[index_of(p.evidence)];
  ++sa4[index_of(p.sa4)];
  ++sa[index_of(p.sa_label)];
  ++si[index_of(p.si_label)];
}

void StayCounts::add(const HospitalStay& s) {
  ++sa[index_of(s.sa_label)];
  ++si[index_of(s.si_label)];
}

namespace {

const std::vector<std::string> kSplitOrder{"train", "validation", "test", "unassigned", "all"};

template <std::size_t N>
Json counts_json(const std::array<std::size_t, N>& counts, const std::array<const char*, N>& names) {
  Json j;
  for (std::size_t i = 0; i < N; ++i) j[names[i]] = counts[i];
  return j;
}

constexpr std::array<const char*, 2> kEvidenceNames{"yes", "no"};
constexpr std::array<const char*, 4> kSa4Names{"positive", "negative", "unsure", "neutral"};
constexpr std::array<const char*, 3> kSaNames{"positive", "neg_unsure", "neutral"};
constexpr std::array<const char*, 3> kSiNames{"positive", "negative", "neutral"};

template <std::size_t N>
void text_row(std::ostringstream& out, const std::string& label, const std::array<std::size_t, N>& counts) {
  out << "  " << std::left << std::setw(12) << label;
  for (auto c : counts) out << std::right << std::setw(12) << c;
  out << '\n';
}

template <std::size_t N>
void text_header(std::ostringstream& out, const std::string& title, const std::array<const char*, N>& names) {
  out << "  " << std::left << std::setw(12) << title;
  for (auto n : names) out << std::right << std::setw(12) << n;
  out << '\n';
}

}  // namespace

Json StatsReport::to_json() const {
  Json j;
  j["patients"] = patients;
  j["stays"] = stays;
  j["notes"] = notes;
  Json para = Json::object();
  for (const auto& name : kSplitOrder) {
    auto it = paragraphs.find(name);
    if (it == paragraphs.end()) continue;
    Json p;
    p["total"] = it->second.total();
    p["evidence"] = counts_json(it->second.evidence, kEvidenceNames);
    p["sa_4way"] = counts_json(it->second.sa4, kSa4Names);
    p["sa"] = counts_json(it->second.sa, kSaNames);
    p["si"] = counts_json(it->second.si, kSiNames);
    para[name] = p;
  }
  j["paragraphs"] = para;
  Json st = Json::object();
  for (const auto& name : kSplitOrder) {
    auto it = stay_labels.find(name);
    if (it == stay_labels.end()) continue;
    Json s;
    s["total"] = it->second.total();
    s["sa"] = counts_json(it->second.sa, kSaNames);
    s["si"] = counts_json(it->second.si, kSiNames);
    st[name] = s;
  }
  j["stay_labels"] = st;
  Json ann;
  ann["total"] = annotations.total();
  ann["sa"] = counts_json(annotations.sa, std::array<const char*, 3>{"positive", "negative", "unsure"});
  ann["si"] = counts_json(annotations.si, std::array<const char*, 2>{"positive", "negative"});
  Json methods = Json::object();
  for (const auto& [m, c] : annotations.sa_methods) methods[m] = c;
  ann["sa_methods"] = methods;
  j["annotations"] = ann;
  return j;
}

std::string StatsReport::to_text() const {
  std::ostringstream out;
  out << "Patients: " << patients << "  Hospital stays: " << stays << "  Notes: " << notes << "\n\n";
  out << "Paragraph-level distribution\n";
  text_header(out, "Evidence", kEvidenceNames);
  for (const auto& name : kSplitOrder) {
    if (auto it = paragraphs.find(name); it != paragraphs.end()) text_row(out, name, it->second.evidence);
  }
  text_header(out, "SA", kSa4Names);
  for (const auto& name : kSplitOrder) {
    if (auto it = paragraphs.find(name); it != paragraphs.end()) text_row(out, name, it->second.sa4);
  }
  text_header(out, "SA merged", kSaNames);
  for (const auto& name : kSplitOrder) {
    if (auto it = paragraphs.find(name); it != paragraphs.end()) text_row(out, name, it->second.sa);
  }
  text_header(out, "SI", kSiNames);
  for (const auto& name : kSplitOrder) {
    if (auto it = paragraphs.find(name); it != paragraphs.end()) text_row(out, name, it->second.si);
  }
  out << "\nHospital-stay distribution\n";
  text_header(out, "SA", kSaNames);
  for (const auto& name : kSplitOrder) {
    if (auto it = stay_labels.find(name); it != stay_labels.end()) text_row(out, name, it->second.sa);
  }
  text_header(out, "SI", kSiNames);
  for (const auto& name : kSplitOrder) {
    if (auto it = stay_labels.find(name); it != stay_labels.end()) text_row(out, name, it->second.si);
  }
  out << "\nUnique annotations: " << annotations.total() << '\n';
  text_header(out, "SA", std::array<const char*, 3>{"positive", "negative", "unsure"});
  text_row(out, "all", annotations.sa);
  text_header(out, "SI", std::array<const char*, 2>{"positive", "negative"});
  text_row(out, "all", annotations.si);
  if (!annotations.sa_methods.empty()) {
    out << "  SA methods:";
    for (const auto& [m, c] : annotations.sa_methods) out << ' ' << m << '=' << c;
    out << '\n';
  }
  return out.str();
}

StatsReport corpus_stats(const Corpus& corpus, const std::vector<Paragraph>& paragraphs, const DatasetSplit* split) {
  StatsReport report;
  report.notes = corpus.notes.size();
  report.stays = corpus.stays.size();
  std::set<std::string> patients;
  for (const auto& s : corpus.stays) patients.insert(s.patient_id);
  report.patients = patients.size();

  std::unordered_map<std::string, std::string> split_of;
  if (split != nullptr) {
    for (auto name : {SplitName::Train, SplitName::Validation, SplitName::Test}) {
      report.paragraphs[std::string(to_string(name))];
      report.stay_labels[std::string(to_string(name))];
      for (const auto& id : split->stays(name)) split_of[id] = std::string(to_string(name));
    }
  }
  auto group = [&](const std::string& stay_id) -> std::string {
    if (split == nullptr) return "all";
    auto it = split_of.find(stay_id);
    return it == split_of.end() ? "unassigned" : it->second;
  };

  for (const auto& p : paragraphs) report.paragraphs[group(p.stay_id)].add(p);
  for (const auto& s : corpus.stays) report.stay_labels[group(s.stay_id)].add(s);

  // Unique annotations: identical (note, span, event, label) entries count once.
  std::set<std::string> seen;
  for (const auto& a : corpus.annotations) {
    const std::string key = to_json(a).dump();
    if (!seen.insert(key).second) continue;
    if (a.event == EventType::SA && a.sa_label) {
      ++report.annotations.sa[index_of(*a.sa_label)];
      if (a.method) ++report.annotations.sa_methods[std::string(to_string(*a.method))];
    } else if (a.si_label) {
      ++report.annotations.si[index_of(*a.si_label)];
    }
  }
  return report;
}

}  // namespace scaner::corpus
