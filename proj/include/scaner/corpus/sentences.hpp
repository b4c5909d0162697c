#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace scaner::corpus {

// [begin, end) in code points. Spans never start or end on whitespace.
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

// Rule-based splitter for clinical text.
//
// A boundary follows '.', '!' or '?' (plus any closing quotes or brackets)
// when the next character is whitespace or the end of text, unless the
// token before the period is a known abbreviation ("Dr.", "e.g.", "pt.") or
// a single letter initial. A boundary is also placed at a blank line, at a
// newline after a line ending in ':', and at a newline when the next line
// opens with a list marker ("-", "*", "1." or "1)"). Semicolons and commas
// never split.
std::vector<SentenceSpan> segment_sentences(std::u32string_view text);

// UTF-8 convenience overload; offsets are still code points.
std::vector<SentenceSpan> segment_sentences(std::string_view utf8_text);

}  // namespace scaner::corpus
