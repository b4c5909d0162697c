#include "scaner/common/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "scaner/common/error.hpp"

namespace scaner {

void read_jsonl(const std::filesystem::path& path,
                const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    try {
      fn(record, line_no);
    } catch (const Error& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records) {
  std::ostringstream out;
  for (const auto& r : records) out << r.dump() << '\n';
  write_text(path, out.str());
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": malformed JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& value) {
  write_text(path, value.dump(2) + "\n");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for " + path.string());
}

std::string require_string(const Json& record, const char* field) {
  const auto it = record.find(field);
  if (it == record.end()) throw DataError(std::string("missing field '") + field + "'");
  if (!it->is_string()) throw DataError(std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

long long require_int(const Json& record, const char* field) {
  const auto it = record.find(field);
  if (it == record.end()) throw DataError(std::string("missing field '") + field + "'");
  if (!it->is_number_integer()) throw DataError(std::string("field '") + field + "' must be an integer");
  return it->get<long long>();
}

}  // namespace scaner
