#include "scaner/predictor/model.hpp"

#include <algorithm>
#include <cmath>

#include "scaner/common/error.hpp"

namespace scaner::predictor {

namespace {

std::array<double, 3> softmax3(const nn::Matrix& z) {
  std::array<double, 3> p{};
  const double m = z.maxCoeff();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i) sum += p[static_cast<std::size_t>(i)] = std::exp(z(0, i) - m);
  for (auto& v : p) v /= sum;
  return p;
}

std::size_t argmax3(const std::array<double, 3>& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::string layer_name(std::size_t l, const char* part) { return "layer" + std::to_string(l) + "." + part; }

}  // namespace

void PredictorConfig::validate() const {
  if (dim == 0 || heads == 0 || layers == 0) throw ConfigError("predictor dim, heads and layers must be positive");
  if (dim % heads != 0) throw ConfigError("predictor dim must be divisible by the number of attention heads");
}

Json PredictorConfig::to_json() const {
  Json j;
  j["dim"] = dim;
  j["heads"] = heads;
  j["layers"] = layers;
  j["ffn_dim"] = ffn();
  return j;
}

PredictorConfig PredictorConfig::from_json(const Json& j) {
  PredictorConfig c;
  c.dim = static_cast<std::size_t>(require_int(j, "dim"));
  c.heads = static_cast<std::size_t>(require_int(j, "heads"));
  c.layers = static_cast<std::size_t>(require_int(j, "layers"));
  c.ffn_dim = static_cast<std::size_t>(require_int(j, "ffn_dim"));
  c.validate();
  return c;
}

SaLabel StayPrediction::sa_label() const { return static_cast<SaLabel>(argmax3(sa)); }
SiLabel StayPrediction::si_label() const { return static_cast<SiLabel>(argmax3(si)); }

StayPredictor::StayPredictor(PredictorConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(derive_seed(seed, "predictor-init"));
  const auto d = static_cast<Eigen::Index>(config_.dim);
  const auto f = static_cast<Eigen::Index>(config_.ffn());
  params_.add("v0", nn::normal_matrix(1, d, 1.0 / std::sqrt(static_cast<double>(d)), rng));
  for (std::size_t l = 0; l < config_.layers; ++l) {
    for (const char* w : {"wq", "wk", "wv", "wo"}) params_.add(layer_name(l, w), nn::xavier_uniform(d, d, rng));
    params_.add(layer_name(l, "ln1.gamma"), nn::Matrix::Ones(1, d));
    params_.add(layer_name(l, "ln1.beta"), nn::Matrix::Zero(1, d));
    params_.add(layer_name(l, "ffn.w1"), nn::xavier_uniform(d, f, rng));
    params_.add(layer_name(l, "ffn.b1"), nn::Matrix::Zero(1, f));
    params_.add(layer_name(l, "ffn.w2"), nn::xavier_uniform(f, d, rng));
    params_.add(layer_name(l, "ffn.b2"), nn::Matrix::Zero(1, d));
    params_.add(layer_name(l, "ln2.gamma"), nn::Matrix::Ones(1, d));
    params_.add(layer_name(l, "ln2.beta"), nn::Matrix::Zero(1, d));
  }
  params_.add("head.sa.w", nn::xavier_uniform(d, 3, rng));
  params_.add("head.sa.b", nn::Matrix::Zero(1, 3));
  params_.add("head.si.w", nn::xavier_uniform(d, 3, rng));
  params_.add("head.si.b", nn::Matrix::Zero(1, 3));
}

StayPredictor::Forward StayPredictor::forward(nn::Graph& g, const nn::Matrix& vectors) const {
  if (vectors.rows() == 0) throw DataError("stay predictor needs at least one paragraph vector");
  if (vectors.cols() != static_cast<Eigen::Index>(config_.dim)) {
    throw DataError("paragraph vectors have width " + std::to_string(vectors.cols()) + ", predictor expects " +
                    std::to_string(config_.dim));
  }
  auto p = [&](const std::string& name) { return g.param(params_.index(name)); };
  const std::size_t dh = config_.dim / config_.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Forward out;
  auto x = g.concat_rows(p("v0"), g.constant(vectors));
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const auto q = g.matmul(x, p(layer_name(l, "wq")));
    const auto k = g.matmul(x, p(layer_name(l, "wk")));
    const auto v = g.matmul(x, p(layer_name(l, "wv")));
    std::vector<nn::Var> parts;
    for (std::size_t h = 0; h < config_.heads; ++h) {
      const auto qh = g.slice_cols(q, h * dh, dh);
      const auto kh = g.slice_cols(k, h * dh, dh);
      const auto vh = g.slice_cols(v, h * dh, dh);
      const auto a = g.softmax_rows(g.scale(g.matmul_nt(qh, kh), scale));
      out.attention.push_back(a);
      parts.push_back(g.matmul(a, vh));
    }
    const auto attended = g.matmul(g.concat_cols(parts), p(layer_name(l, "wo")));
    x = g.layer_norm_rows(g.add(x, attended), p(layer_name(l, "ln1.gamma")), p(layer_name(l, "ln1.beta")));
    auto ffn = g.gelu(g.add_row(g.matmul(x, p(layer_name(l, "ffn.w1"))), p(layer_name(l, "ffn.b1"))));
    ffn = g.add_row(g.matmul(ffn, p(layer_name(l, "ffn.w2"))), p(layer_name(l, "ffn.b2")));
    x = g.layer_norm_rows(g.add(x, ffn), p(layer_name(l, "ln2.gamma")), p(layer_name(l, "ln2.beta")));
  }
  out.hidden = x;
  const auto h0 = g.slice_rows(x, 0, 1);
  out.sa = g.add_row(g.matmul(h0, p("head.sa.w")), p("head.sa.b"));
  out.si = g.add_row(g.matmul(h0, p("head.si.w")), p("head.si.b"));
  return out;
}

nn::Matrix StayPredictor::attention_forward(const nn::Matrix& vectors, std::vector<nn::Matrix>* attention) const {
  nn::Graph g(&params_);
  const auto f = forward(g, vectors);
  if (attention) {
    attention->clear();
    for (auto a : f.attention) attention->push_back(g.value(a));
  }
  return g.value(f.hidden);
}

StayPrediction StayPredictor::predict(const nn::Matrix& vectors) const {
  nn::Graph g(&params_);
  const auto f = forward(g, vectors);
  return {softmax3(g.value(f.sa)), softmax3(g.value(f.si))};
}

nn::Checkpoint StayPredictor::to_checkpoint(const Json& extra) const {
  nn::Checkpoint c;
  c.kind = kCheckpointKind;
  c.metadata = extra;
  c.metadata["config"] = config_.to_json();
  c.metadata["class_orders"] = {{"sa", {"positive", "neg_unsure", "neutral"}}, {"si", {"positive", "negative", "neutral"}}};
  c.params = params_;
  return c;
}

StayPredictor StayPredictor::from_checkpoint(const nn::Checkpoint& c) {
  if (c.kind != kCheckpointKind) throw DataError("expected a predictor checkpoint, found '" + c.kind + "'");
  const Json orders = {{"sa", {"positive", "neg_unsure", "neutral"}}, {"si", {"positive", "negative", "neutral"}}};
  if (!c.metadata.contains("class_orders") || c.metadata["class_orders"] != orders) {
    throw DataError("predictor checkpoint has an incompatible class ordering");
  }
  StayPredictor p(PredictorConfig::from_json(c.metadata.at("config")), 0);
  if (p.params_.size() != c.params.size()) throw DataError("predictor checkpoint has the wrong parameter count");
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    if (p.params_.name(i) != c.params.name(i) || p.params_.value(i).rows() != c.params.value(i).rows() ||
        p.params_.value(i).cols() != c.params.value(i).cols()) {
      throw DataError("predictor checkpoint parameter '" + c.params.name(i) + "' does not match its config");
    }
  }
  p.params_ = c.params;
  return p;
}

}  // namespace scaner::predictor
