#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "scaner/common/jsonl.hpp"
#include "scaner/nn/parameters.hpp"

namespace scaner::nn {

// Binary model container:
//   "SCANERCK" | u32 major | u32 minor | u32 patch | str kind | str metadata-json
//   | u32 count | count x (str name | u64 rows | u64 cols | rows*cols f64, row-major)
// where str is u64 length + bytes. All integers and doubles little-endian.
struct Checkpoint {
  static constexpr std::uint32_t kMajor = 1;
  static constexpr std::uint32_t kMinor = 0;
  static constexpr std::uint32_t kPatch = 0;

  std::string kind;
  Json metadata;
  ParameterStore params;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws DataError on a bad magic, an incompatible major version or truncation.
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace scaner::nn
