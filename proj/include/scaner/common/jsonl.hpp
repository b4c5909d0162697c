#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace scaner {

using Json = nlohmann::ordered_json;

// Calls `fn(record, line_number)` for each non-blank line. Parse failures
// raise DataError naming the file and 1-based line number; exceptions thrown
// by `fn` are rethrown with the same location prefix.
void read_jsonl(const std::filesystem::path& path,
                const std::function<void(const Json&, std::size_t)>& fn);

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& value);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

// Field accessors that raise DataError with the field name on absence or
// type mismatch.
std::string require_string(const Json& record, const char* field);
long long require_int(const Json& record, const char* field);

}  // namespace scaner
