#include "scaner/corpus/sections.hpp"

#include <algorithm>

#include "scaner/common/utf8.hpp"

namespace scaner::corpus {

SectionFilter SectionFilter::clinical_default() {
  SectionFilter f;
  f.allowed = {
      {"Allergy", {"allergy", "allergies", "allergic reactions", "adverse reactions"}},
      {"Case Management", {"case management", "case manager note"}},
      {"Consult", {"consult", "consultation", "reason for consult", "consult note"}},
      {"Discharge Summary",
       {"discharge summary", "brief hospital course", "hospital course", "discharge diagnosis",
        "discharge condition"}},
      {"Family history", {"family history", "family hx", "fhx"}},
      {"General", {"general", "chief complaint", "reason for admission"}},
      {"HIV Screening", {"hiv screening", "hiv screen"}},
      {"Labs and Studies", {"labs and studies", "labs", "laboratory data", "pertinent results", "studies"}},
      {"Medication",
       {"medication", "medications", "medications on admission", "discharge medications", "current medications",
        "meds"}},
      {"Nursing", {"nursing", "nursing note", "nursing assessment"}},
      {"Nursing/other", {"nursing/other", "nursing progress note"}},
      {"Nutrition", {"nutrition", "nutrition assessment"}},
      {"Observation and Plan",
       {"observation and plan", "assessment and plan", "assessment/plan", "impression and plan", "assessment",
        "plan", "a/p"}},
      {"Past Medical History", {"past medical history", "past history", "medical history", "pmh"}},
      {"Patient Instructions", {"patient instructions", "discharge instructions", "followup instructions"}},
      {"Physical Exam", {"physical exam", "physical examination", "exam"}},
      {"Physician", {"physician", "physician note", "attending note"}},
      {"Present Illness", {"present illness", "history of present illness", "hpi"}},
      {"Problem List", {"problem list", "active problems"}},
      {"Radiology", {"radiology", "imaging"}},
      {"Rehab Services", {"rehab services", "rehabilitation", "physical therapy", "occupational therapy"}},
      {"Respiratory", {"respiratory", "respiratory care"}},
      {"Sexual and Social History", {"sexual and social history", "social history", "sexual history", "social hx"}},
      {"Social Work", {"social work", "social work note"}},
  };
  f.other = {
      {"Billing", {"billing", "billing information"}},
      {"Signature", {"signature", "electronically signed by"}},
      {"Addendum", {"addendum"}},
      {"Attestation", {"attestation"}},
      {"Code Status", {"code status"}},
      {"Disposition", {"disposition", "discharge disposition"}},
      {"Contact", {"contact", "contact information"}},
      {"Facility", {"facility"}},
  };
  return f;
}

std::vector<std::string> SectionFilter::allowed_section_names() const {
  std::vector<std::string> names;
  names.reserve(allowed.size());
  for (const auto& s : allowed) names.push_back(s.name);
  return names;
}

bool SectionFilter::is_allowed(std::string_view section) const {
  return std::any_of(allowed.begin(), allowed.end(), [&](const auto& s) { return s.name == section; });
}

namespace {

char32_t lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

// Length of the match of `pattern` at `pos` including the trailing ':', or 0.
std::size_t match_header(std::u32string_view text, std::size_t pos, const std::u32string& pattern) {
  if (pos + pattern.size() > text.size()) return 0;
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    if (lower(text[pos + k]) != pattern[k]) return 0;
  }
  std::size_t end = pos + pattern.size();
  while (end < text.size() && (text[end] == U' ' || text[end] == U'\t')) ++end;
  if (end < text.size() && text[end] == U':') return end + 1 - pos;
  return 0;
}

struct CompiledPattern {
  std::u32string pattern;
  const std::string* section;
  bool allowed;
};

}  // namespace

std::vector<HeaderMatch> find_headers(std::u32string_view text, const SectionFilter& filter) {
  std::vector<CompiledPattern> patterns;
  for (const auto& s : filter.allowed) {
    for (const auto& p : s.header_patterns) patterns.push_back({utf8::decode(p), &s.name, true});
  }
  for (const auto& s : filter.other) {
    for (const auto& p : s.header_patterns) patterns.push_back({utf8::decode(p), &s.name, false});
  }
  for (auto& p : patterns) {
    for (auto& c : p.pattern) c = lower(c);
  }

  std::vector<HeaderMatch> matches;
  std::size_t line_start = 0;
  while (line_start < text.size()) {
    std::size_t pos = line_start;
    while (pos < text.size() && (text[pos] == U' ' || text[pos] == U'\t')) ++pos;
    const CompiledPattern* best = nullptr;
    for (const auto& p : patterns) {
      if (match_header(text, pos, p.pattern) == 0) continue;
      if (best == nullptr || p.pattern.size() > best->pattern.size()) best = &p;
    }
    if (best != nullptr) matches.push_back({pos, best->pattern.size(), *best->section, best->allowed});
    const auto nl = text.find(U'\n', line_start);
    if (nl == std::u32string_view::npos) break;
    line_start = nl + 1;
  }
  return matches;
}

std::vector<SectionSegment> filter_sections(std::u32string_view text, const SectionFilter& filter) {
  const auto headers = find_headers(text, filter);
  if (headers.empty()) return {{"", 0, text.size(), true}};
  std::vector<SectionSegment> segments;
  for (std::size_t i = 0; i < headers.size(); ++i) {
    if (!headers[i].allowed) continue;
    const std::size_t end = i + 1 < headers.size() ? headers[i + 1].offset : text.size();
    segments.push_back({headers[i].section, headers[i].offset, end, false});
  }
  return segments;
}

std::vector<SectionSegment> filter_sections(const ClinicalNote& note, const SectionFilter& filter) {
  return filter_sections(utf8::decode(note.text), filter);
}

}  // namespace scaner::corpus
