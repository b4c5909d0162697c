#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scaner/common/jsonl.hpp"
#include "scaner/common/rng.hpp"
#include "scaner/nn/graph.hpp"
#include "scaner/nn/parameters.hpp"

namespace scaner::retriever {

// Lowercased runs of ASCII letters and digits.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  static constexpr int kUnknown = 0;

  // Tokens seen at least `min_count` times, ordered by descending count then
  // lexicographically. Id 0 is reserved for unknown tokens.
  static Vocabulary build(const std::vector<std::string>& texts, std::size_t min_count = 1);

  std::size_t size() const { return tokens_.size() + 1; }
  std::vector<int> encode(std::string_view text, std::size_t max_tokens) const;

  Json to_json() const;
  static Vocabulary from_json(const Json& j);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Maps a paragraph to one d-dimensional row. Parameters live in a store
// owned by the model; the encoder only knows their names.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t dim() const = 0;
  // True when identical text always maps to an identical vector.
  virtual bool deterministic() const = 0;

  virtual void init_parameters(nn::ParameterStore& params, Rng& rng) const = 0;
  // Records the encoding on `graph` and returns a 1 x dim() row.
  virtual nn::Var encode(nn::Graph& graph, const nn::ParameterStore& params, std::string_view text) const = 0;

  virtual Json to_json() const = 0;
};

struct ToyEncoderConfig {
  std::size_t dim = 48;
  std::size_t max_tokens = 512;
  std::size_t min_token_count = 1;
};

// Token embeddings, one single-head self-attention layer with a residual
// connection, then the mean over tokens.
class ToyEncoder final : public Encoder {
 public:
  ToyEncoder(ToyEncoderConfig config, Vocabulary vocab);

  std::string kind() const override { return "toy"; }
  std::size_t dim() const override { return config_.dim; }
  bool deterministic() const override { return true; }

  void init_parameters(nn::ParameterStore& params, Rng& rng) const override;
  nn::Var encode(nn::Graph& graph, const nn::ParameterStore& params, std::string_view text) const override;

  Json to_json() const override;

  const Vocabulary& vocabulary() const { return vocab_; }
  const ToyEncoderConfig& config() const { return config_; }

 private:
  ToyEncoderConfig config_;
  Vocabulary vocab_;
};

// Throws DataError on an unknown encoder kind.
std::shared_ptr<const Encoder> encoder_from_json(const Json& j);

}  // namespace scaner::retriever
