#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "scaner/common/labels.hpp"
#include "scaner/nn/checkpoint.hpp"
#include "scaner/nn/graph.hpp"
#include "scaner/nn/parameters.hpp"

namespace scaner::predictor {

struct PredictorConfig {
  std::size_t dim = 768;
  std::size_t heads = 3;
  std::size_t layers = 2;
  std::size_t ffn_dim = 0;  // 0 means 4 * dim

  std::size_t ffn() const { return ffn_dim == 0 ? 4 * dim : ffn_dim; }
  void validate() const;
  Json to_json() const;
  static PredictorConfig from_json(const Json& j);
};

struct StayPrediction {
  std::array<double, 3> sa{};  // positive, neg_unsure, neutral
  std::array<double, 3> si{};  // positive, negative, neutral

  SaLabel sa_label() const;
  SiLabel si_label() const;
};

// v0 followed by the paragraph vectors, through `layers` post-norm encoder
// layers (multi-head self-attention, then a GELU feed-forward block, each
// with a residual and layer norm). The SA and SI heads read row 0.
class StayPredictor {
 public:
  static constexpr const char* kCheckpointKind = "predictor";

  StayPredictor(PredictorConfig config, std::uint64_t seed);

  struct Forward {
    nn::Var hidden;                  // (n + 1) x dim
    nn::Var sa;                      // 1 x 3 logits
    nn::Var si;                      // 1 x 3 logits
    std::vector<nn::Var> attention;  // layers * heads matrices, (n + 1) x (n + 1)
  };

  // Throws DataError when `vectors` is empty or has the wrong width.
  Forward forward(nn::Graph& graph, const nn::Matrix& vectors) const;

  // Hidden states h0..hn; `attention` (optional) receives every head's
  // weight matrix.
  nn::Matrix attention_forward(const nn::Matrix& vectors, std::vector<nn::Matrix>* attention = nullptr) const;

  StayPrediction predict(const nn::Matrix& vectors) const;

  const PredictorConfig& config() const { return config_; }
  const nn::ParameterStore& params() const { return params_; }
  nn::ParameterStore& params() { return params_; }

  nn::Checkpoint to_checkpoint(const Json& extra = Json::object()) const;
  static StayPredictor from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  PredictorConfig config_;
  nn::ParameterStore params_;
};

inline StayPrediction predict_stay(const StayPredictor& predictor, const nn::Matrix& vectors) {
  return predictor.predict(vectors);
}

}  // namespace scaner::predictor
