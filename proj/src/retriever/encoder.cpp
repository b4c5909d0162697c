#include "scaner/retriever/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "scaner/common/error.hpp"

namespace scaner::retriever {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 128 && std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts) {
    for (auto& tok : tokenize(t)) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (const auto& [tok, n] : items) {
    if (n < min_count) continue;
    v.ids_[tok] = static_cast<int>(v.tokens_.size()) + 1;
    v.tokens_.push_back(tok);
  }
  return v;
}

std::vector<int> Vocabulary::encode(std::string_view text, std::size_t max_tokens) const {
  std::vector<int> ids;
  for (const auto& tok : tokenize(text)) {
    if (ids.size() == max_tokens) break;
    const auto it = ids_.find(tok);
    ids.push_back(it == ids_.end() ? kUnknown : it->second);
  }
  return ids;
}

Json Vocabulary::to_json() const { return Json(tokens_); }

Vocabulary Vocabulary::from_json(const Json& j) {
  if (!j.is_array()) throw DataError("vocabulary must be a JSON array");
  Vocabulary v;
  for (const auto& tok : j) {
    const auto s = tok.get<std::string>();
    if (!v.ids_.emplace(s, static_cast<int>(v.tokens_.size()) + 1).second) {
      throw DataError("vocabulary repeats token '" + s + "'");
    }
    v.tokens_.push_back(s);
  }
  return v;
}

ToyEncoder::ToyEncoder(ToyEncoderConfig config, Vocabulary vocab) : config_(config), vocab_(std::move(vocab)) {
  if (config_.dim == 0) throw ConfigError("encoder dimension must be positive");
  if (config_.max_tokens == 0) throw ConfigError("max_tokens must be positive");
}

void ToyEncoder::init_parameters(nn::ParameterStore& params, Rng& rng) const {
  const auto d = static_cast<Eigen::Index>(config_.dim);
  params.add("encoder.embedding", nn::normal_matrix(static_cast<Eigen::Index>(vocab_.size()), d, 1.0 / std::sqrt(d), rng));
  params.add("encoder.wq", nn::xavier_uniform(d, d, rng));
  params.add("encoder.wk", nn::xavier_uniform(d, d, rng));
  params.add("encoder.wv", nn::xavier_uniform(d, d, rng));
  params.add("encoder.wo", nn::xavier_uniform(d, d, rng));
}

nn::Var ToyEncoder::encode(nn::Graph& g, const nn::ParameterStore& params, std::string_view text) const {
  auto ids = vocab_.encode(text, config_.max_tokens);
  if (ids.empty()) ids.push_back(Vocabulary::kUnknown);
  const auto x = g.embedding(params.index("encoder.embedding"), ids);
  const auto q = g.matmul(x, g.param(params.index("encoder.wq")));
  const auto k = g.matmul(x, g.param(params.index("encoder.wk")));
  const auto v = g.matmul(x, g.param(params.index("encoder.wv")));
  const auto a = g.softmax_rows(g.scale(g.matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(config_.dim))));
  const auto h = g.add(x, g.matmul(g.matmul(a, v), g.param(params.index("encoder.wo"))));
  return g.mean_rows(h);
}

Json ToyEncoder::to_json() const {
  Json j;
  j["kind"] = kind();
  j["dim"] = config_.dim;
  j["max_tokens"] = config_.max_tokens;
  j["min_token_count"] = config_.min_token_count;
  j["vocabulary"] = vocab_.to_json();
  return j;
}

std::shared_ptr<const Encoder> encoder_from_json(const Json& j) {
  const auto kind = require_string(j, "kind");
  if (kind != "toy") throw DataError("unknown encoder kind '" + kind + "'");
  ToyEncoderConfig c;
  c.dim = static_cast<std::size_t>(require_int(j, "dim"));
  c.max_tokens = static_cast<std::size_t>(require_int(j, "max_tokens"));
  c.min_token_count = static_cast<std::size_t>(require_int(j, "min_token_count"));
  if (!j.contains("vocabulary")) throw DataError("encoder is missing its vocabulary");
  return std::make_shared<ToyEncoder>(c, Vocabulary::from_json(j["vocabulary"]));
}

}  // namespace scaner::retriever
