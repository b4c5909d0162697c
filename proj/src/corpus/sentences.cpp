#include "scaner/corpus/sentences.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "scaner/common/utf8.hpp"

namespace scaner::corpus {

namespace {

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' || c == 0x00A0 ||
         c == 0x2028 || c == 0x2029;
}

bool is_terminal(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool is_closer(char32_t c) {
  return c == U')' || c == U']' || c == U'"' || c == U'\'' || c == 0x201D || c == 0x2019;
}

bool is_ascii_alpha(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'); }
bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

char32_t lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

// Tokens that end in a period without ending the sentence.
constexpr std::array<std::u32string_view, 14> kAbbreviations{
    U"dr", U"mr", U"mrs", U"ms", U"prof", U"jr", U"sr", U"st", U"pt", U"pts", U"vs", U"approx", U"appt", U"hosp"};

// Token immediately before position `dot` (which holds '.'), lowercased and
// stripped of opening punctuation.
std::u32string token_before(std::u32string_view text, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  std::u32string token;
  for (std::size_t i = begin; i < dot; ++i) {
    const char32_t c = text[i];
    if (token.empty() && (c == U'(' || c == U'[' || c == U'"' || c == U'\'')) continue;
    token.push_back(lower(c));
  }
  return token;
}

bool is_abbreviation(std::u32string_view token) {
  if (token.empty()) return false;
  if (token.size() == 1 && is_ascii_alpha(token[0])) return true;  // initials
  if (std::find(kAbbreviations.begin(), kAbbreviations.end(), token) != kAbbreviations.end()) return true;
  // Dotted letter abbreviations such as "e.g", "i.e", "b.i.d".
  bool has_dot = false;
  for (char32_t c : token) {
    if (c == U'.') {
      has_dot = true;
    } else if (!is_ascii_alpha(c)) {
      return false;
    }
  }
  return has_dot;
}

// Whether the line starting at `pos` opens with a list marker.
bool starts_with_list_marker(std::u32string_view text, std::size_t pos) {
  while (pos < text.size() && (text[pos] == U' ' || text[pos] == U'\t')) ++pos;
  if (pos >= text.size()) return false;
  const char32_t c = text[pos];
  if (c == U'-' || c == U'*' || c == 0x2022) return true;
  if (!is_digit(c)) return false;
  while (pos < text.size() && is_digit(text[pos])) ++pos;
  return pos < text.size() && (text[pos] == U'.' || text[pos] == U')');
}

}  // namespace

std::vector<SentenceSpan> segment_sentences(std::u32string_view text) {
  const std::size_t n = text.size();
  std::vector<std::size_t> cuts;

  std::size_t line_start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char32_t c = text[i];
    if (is_terminal(c)) {
      std::size_t j = i + 1;
      while (j < n && (is_terminal(text[j]) || is_closer(text[j]))) ++j;
      if (j < n && !is_space(text[j])) {
        i = j - 1;
        continue;
      }
      if (c == U'.' && j == i + 1 && is_abbreviation(token_before(text, i))) continue;
      cuts.push_back(j);
      i = j - 1;
    } else if (c == U'\n') {
      // Last non-blank character of the line that just ended.
      std::size_t k = i;
      while (k > line_start && is_space(text[k - 1])) --k;
      const bool ends_with_colon = k > line_start && text[k - 1] == U':';

      std::size_t next = i + 1;
      while (next < n && text[next] != U'\n' && is_space(text[next])) ++next;
      const bool blank_follows = next < n && text[next] == U'\n';

      if (ends_with_colon || blank_follows || starts_with_list_marker(text, i + 1)) cuts.push_back(i);
      line_start = i + 1;
    }
  }
  cuts.push_back(n);

  std::vector<SentenceSpan> spans;
  std::size_t begin = 0;
  for (std::size_t cut : cuts) {
    std::size_t b = begin;
    std::size_t e = std::max(cut, begin);
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    if (b < e) spans.push_back({b, e});
    begin = std::max(begin, cut);
  }
  return spans;
}

std::vector<SentenceSpan> segment_sentences(std::string_view utf8_text) {
  return segment_sentences(utf8::decode(utf8_text));
}

}  // namespace scaner::corpus
