#include "scaner/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "scaner/common/error.hpp"

namespace scaner::nn {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'A', 'N', 'E', 'R', 'C', 'K'};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

void put_str(std::string& out, std::string_view s) {
  put_le<std::uint64_t>(out, s.size());
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

  std::string str() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::string_view raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("checkpoint is truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof kMagic);
  put_le(out, Checkpoint::kMajor);
  put_le(out, Checkpoint::kMinor);
  put_le(out, Checkpoint::kPatch);
  put_str(out, ckpt.kind);
  put_str(out, ckpt.metadata.dump());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.params.size()));
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const Matrix& m = ckpt.params.value(i);
    put_str(out, ckpt.params.name(i));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
    }
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.raw(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw DataError("not a checkpoint file (bad magic)");
  }
  const auto major = in.get<std::uint32_t>();
  const auto minor = in.get<std::uint32_t>();
  const auto patch = in.get<std::uint32_t>();
  if (major != Checkpoint::kMajor) {
    throw DataError("unsupported checkpoint version " + std::to_string(major) + "." + std::to_string(minor) + "." +
                    std::to_string(patch));
  }
  Checkpoint ckpt;
  ckpt.kind = in.str();
  try {
    ckpt.metadata = Json::parse(in.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.str();
    const auto rows = in.get<std::uint64_t>();
    const auto cols = in.get<std::uint64_t>();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in.f64();
    }
    ckpt.params.add(std::move(name), std::move(m));
  }
  if (!in.done()) throw DataError("checkpoint has trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_text(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_text(path)); }

}  // namespace scaner::nn
