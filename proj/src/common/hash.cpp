#include "scaner/common/hash.hpp"

#include <array>
#include <cstdio>

#include <openssl/evp.h>

#include "scaner/common/error.hpp"
#include "scaner/common/jsonl.hpp"

namespace scaner {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int digest_len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &digest_len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(digest_len * 2);
  char buf[3];
  for (unsigned int i = 0; i < digest_len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

}  // namespace scaner
