#include "scaner/common/utf8.hpp"

#include "scaner/common/error.hpp"

namespace scaner::utf8 {

namespace {

// Returns the sequence length for a lead byte, or 0 if invalid.
std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return 4;
  return 0;
}

char32_t decode_at(std::string_view text, std::size_t pos, std::size_t& len) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  len = sequence_length(lead);
  if (len == 0 || pos + len > text.size()) {
    throw DataError("invalid UTF-8 at byte " + std::to_string(pos));
  }
  if (len == 1) return lead;
  char32_t cp = lead & (0xFF >> (len + 1));
  for (std::size_t i = 1; i < len; ++i) {
    const auto cont = static_cast<unsigned char>(text[pos + i]);
    if ((cont & 0xC0) != 0x80) throw DataError("invalid UTF-8 at byte " + std::to_string(pos + i));
    cp = (cp << 6) | (cont & 0x3F);
  }
  return cp;
}

}  // namespace

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t len = 0;
    out.push_back(decode_at(text, pos, len));
    pos += len;
  }
  return out;
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

std::size_t length(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < text.size(); ++n) {
    std::size_t len = 0;
    decode_at(text, pos, len);
    pos += len;
  }
  return n;
}

std::vector<std::size_t> byte_offsets(std::string_view text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  for (std::size_t pos = 0; pos < text.size();) {
    offsets.push_back(pos);
    std::size_t len = 0;
    decode_at(text, pos, len);
    pos += len;
  }
  offsets.push_back(text.size());
  return offsets;
}

}  // namespace scaner::utf8
