#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace scaner::utf8 {

// Decodes UTF-8 into code points; throws DataError on malformed input.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);

// Number of code points; throws DataError on malformed input.
std::size_t length(std::string_view text);

// byte_offsets[i] is the byte position of code point i; the final entry is
// text.size(), so the vector has length(text) + 1 entries.
std::vector<std::size_t> byte_offsets(std::string_view text);

}  // namespace scaner::utf8
