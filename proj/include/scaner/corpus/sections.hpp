#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "scaner/corpus/types.hpp"

namespace scaner::corpus {

struct SectionDefinition {
  std::string name;
  // Lowercase header strings; matched case-insensitively at the start of a
  // line and followed by ':'.
  std::vector<std::string> header_patterns;
};

// Recognized headers split a note into sections; only sections listed in
// `allowed` are kept. `other` lists headers that are recognized (so they end
// the preceding section) but never retained.
struct SectionFilter {
  std::vector<SectionDefinition> allowed;
  std::vector<SectionDefinition> other;

  // The 24 sections selected for annotation, with common header variants.
  static SectionFilter clinical_default();

  std::vector<std::string> allowed_section_names() const;
  bool is_allowed(std::string_view section) const;
};

// [begin, end) in code points of the note text.
struct SectionSegment {
  std::string section;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool headerless = false;
};

// A header match at a specific code-point offset.
struct HeaderMatch {
  std::size_t offset = 0;
  std::size_t length = 0;  // pattern length, excluding the ':'
  std::string section;
  bool allowed = false;
};

std::vector<HeaderMatch> find_headers(std::u32string_view text, const SectionFilter& filter);

// Segments start at a header and run until the next recognized header.
// Text before the first header is not part of any section and is dropped.
// A note without any recognized header is returned whole as one segment.
std::vector<SectionSegment> filter_sections(const ClinicalNote& note, const SectionFilter& filter);
std::vector<SectionSegment> filter_sections(std::u32string_view text, const SectionFilter& filter);

}  // namespace scaner::corpus
