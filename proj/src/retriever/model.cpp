#include "scaner/retriever/model.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "scaner/common/error.hpp"
#include "scaner/metrics/metrics.hpp"
#include "scaner/nn/adam.hpp"

namespace scaner::retriever {

namespace {

template <std::size_t N>
std::array<double, N> softmax(const Eigen::MatrixXd& row) {
  std::array<double, N> out{};
  const double m = row.maxCoeff();
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) sum += out[i] = std::exp(row(0, static_cast<Eigen::Index>(i)) - m);
  for (auto& v : out) v /= sum;
  return out;
}

template <std::size_t N>
std::size_t argmax(const std::array<double, N>& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

template <std::size_t N>
Json probs_json(const std::array<double, N>& p) {
  return Json(std::vector<double>(p.begin(), p.end()));
}

void add_head(nn::ParameterStore& params, const std::string& name, std::size_t d, std::size_t classes, Rng& rng) {
  params.add("head." + name + ".w", nn::xavier_uniform(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(classes), rng));
  params.add("head." + name + ".b", Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(classes)));
}

nn::Var head(nn::Graph& g, const nn::ParameterStore& params, nn::Var x, const std::string& name) {
  return g.add_row(g.matmul(x, g.param(params.index("head." + name + ".w"))), g.param(params.index("head." + name + ".b")));
}

}  // namespace

Evidence ParagraphScores::evidence_label() const { return static_cast<Evidence>(argmax(evidence)); }
SaLabel ParagraphScores::sa_label() const { return static_cast<SaLabel>(argmax(sa)); }
SiLabel ParagraphScores::si_label() const { return static_cast<SiLabel>(argmax(si)); }

RetrieverModel::RetrieverModel(std::shared_ptr<const Encoder> encoder, std::uint64_t seed) : encoder_(std::move(encoder)) {
  if (!encoder_) throw ConfigError("retriever needs an encoder");
  Rng rng(derive_seed(seed, "retriever-init"));
  encoder_->init_parameters(params_, rng);
  add_head(params_, "evidence", encoder_->dim(), 2, rng);
  add_head(params_, "sa", encoder_->dim(), 3, rng);
  add_head(params_, "si", encoder_->dim(), 3, rng);
}

RetrieverModel::RetrieverModel(std::shared_ptr<const Encoder> encoder, nn::ParameterStore params)
    : encoder_(std::move(encoder)), params_(std::move(params)) {}

HeadVars RetrieverModel::forward(nn::Graph& g, std::string_view text) const {
  HeadVars h;
  h.vector = encoder_->encode(g, params_, text);
  h.evidence = head(g, params_, h.vector, "evidence");
  h.sa = head(g, params_, h.vector, "sa");
  h.si = head(g, params_, h.vector, "si");
  return h;
}

ParagraphScores RetrieverModel::classify(std::string_view text, Eigen::RowVectorXd* vector) const {
  if (text.empty()) throw DataError("cannot classify an empty paragraph");
  nn::Graph g(&params_);
  const auto h = forward(g, text);
  if (vector) *vector = g.value(h.vector);
  return {softmax<2>(g.value(h.evidence)), softmax<3>(g.value(h.sa)), softmax<3>(g.value(h.si))};
}

Eigen::RowVectorXd RetrieverModel::encode(std::string_view text) const {
  nn::Graph g(&params_);
  return g.value(encoder_->encode(g, params_, text));
}

Json retriever_class_orders() {
  Json j;
  j["evidence"] = {"yes", "no"};
  j["sa"] = {"positive", "neg_unsure", "neutral"};
  j["si"] = {"positive", "negative", "neutral"};
  return j;
}

nn::Checkpoint RetrieverModel::to_checkpoint(const Json& training) const {
  nn::Checkpoint c;
  c.kind = kCheckpointKind;
  c.metadata["encoder"] = encoder_->to_json();
  c.metadata["dim"] = dim();
  c.metadata["class_orders"] = retriever_class_orders();
  c.metadata["training"] = training;
  c.params = params_;
  return c;
}

RetrieverModel RetrieverModel::from_checkpoint(const nn::Checkpoint& c) {
  if (c.kind != kCheckpointKind) throw DataError("expected a retriever checkpoint, found '" + c.kind + "'");
  if (!c.metadata.contains("class_orders") || c.metadata["class_orders"] != retriever_class_orders()) {
    throw DataError("retriever checkpoint has an incompatible class ordering");
  }
  auto encoder = encoder_from_json(c.metadata.at("encoder"));
  RetrieverModel probe(encoder, 0);
  if (probe.params_.size() != c.params.size()) throw DataError("retriever checkpoint has the wrong parameter count");
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    if (probe.params_.name(i) != c.params.name(i) || probe.params_.value(i).rows() != c.params.value(i).rows() ||
        probe.params_.value(i).cols() != c.params.value(i).cols()) {
      throw DataError("retriever checkpoint parameter '" + c.params.name(i) + "' does not match the encoder");
    }
  }
  return RetrieverModel(std::move(encoder), c.params);
}

std::vector<RetrievedParagraph> retrieve_evidence(const RetrieverModel& model, const corpus::HospitalStay& stay,
                                                  const std::vector<corpus::Paragraph>& paragraphs) {
  if (stay.note_ids.empty()) throw DataError("stay " + stay.stay_id + " has no notes");
  std::map<std::string, std::size_t> note_rank;
  for (std::size_t i = 0; i < stay.note_ids.size(); ++i) note_rank.emplace(stay.note_ids[i], i);
  std::vector<const corpus::Paragraph*> mine;
  for (const auto& p : paragraphs) {
    if (note_rank.count(p.note_id)) mine.push_back(&p);
  }
  std::stable_sort(mine.begin(), mine.end(), [&](const corpus::Paragraph* a, const corpus::Paragraph* b) {
    const auto ra = note_rank[a->note_id], rb = note_rank[b->note_id];
    return ra != rb ? ra < rb : a->paragraph_id < b->paragraph_id;
  });
  std::vector<RetrievedParagraph> out;
  for (const auto* p : mine) {
    Eigen::RowVectorXd v;
    const auto s = model.classify(p->text, &v);
    if (s.evidence_label() == Evidence::Yes) out.push_back({*p, s, std::move(v)});
  }
  return out;
}

Json paragraph_prediction_json(const std::string& paragraph_id, const ParagraphScores& s) {
  Json j;
  j["paragraph_id"] = paragraph_id;
  j["evidence_prob"] = s.evidence[0];
  j["sa_probs"] = probs_json(s.sa);
  j["si_probs"] = probs_json(s.si);
  j["evidence"] = to_string(s.evidence_label());
  j["sa_label"] = to_string(s.sa_label());
  j["si_label"] = to_string(s.si_label());
  return j;
}

void RetrieverTrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("retriever learning_rate must be positive");
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
  if (batch_size == 0 || max_epochs == 0 || patience == 0) {
    throw ConfigError("retriever batch_size, max_epochs and patience must be positive");
  }
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  loss.validate();
}

Json RetrieverTrainConfig::to_json() const {
  Json j;
  j["learning_rate"] = learning_rate;
  j["warmup_steps"] = warmup_steps;
  j["adam_epsilon"] = adam_epsilon;
  j["batch_size"] = batch_size;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["seed"] = seed;
  j["gamma"] = gamma;
  j["alpha"] = loss.alpha;
  j["beta"] = loss.beta;
  return j;
}

Json RetrieverEpoch::to_json() const {
  Json j;
  j["epoch"] = epoch;
  j["steps"] = steps;
  j["train_loss"] = train_loss;
  j["validation_evidence_macro_f1"] = validation_evidence_f1;
  j["validation_sa_macro_f1"] = validation_sa_f1;
  j["validation_si_macro_f1"] = validation_si_f1;
  return j;
}

std::vector<ParagraphScores> classify_all(const RetrieverModel& model, const std::vector<corpus::Paragraph>& paragraphs) {
  std::vector<ParagraphScores> out;
  out.reserve(paragraphs.size());
  for (const auto& p : paragraphs) out.push_back(model.classify(p.text));
  return out;
}

ParagraphTaskF1 paragraph_macro_f1(const std::vector<corpus::Paragraph>& paragraphs,
                                   const std::vector<ParagraphScores>& scores) {
  if (paragraphs.size() != scores.size()) throw DataError("paragraph and score counts differ");
  std::vector<std::size_t> ge, pe, gs, ps, gi, pi;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    const auto g = task_gold(paragraphs[i]);
    ge.push_back(g.evidence);
    pe.push_back(index_of(scores[i].evidence_label()));
    gs.push_back(g.sa);
    ps.push_back(index_of(scores[i].sa_label()));
    gi.push_back(g.si);
    pi.push_back(index_of(scores[i].si_label()));
  }
  auto f1 = [](const auto& g, const auto& p, std::size_t n) {
    std::vector<std::string> labels(n);
    return metrics::class_metrics(metrics::confusion_matrix(g, p, labels)).overall.f1;
  };
  return {f1(ge, pe, 2), f1(gs, ps, 3), f1(gi, pi, 3)};
}

RetrieverTrainResult train_retriever(RetrieverModel initial, const std::vector<corpus::Paragraph>& train,
                                     const std::vector<corpus::Paragraph>& validation,
                                     const RetrieverTrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train.empty()) throw DataError("retriever training set is empty");
  if (validation.empty()) throw DataError("retriever validation set is empty");
  for (const auto& p : train) {
    if (p.text.empty()) throw DataError("training paragraph " + p.paragraph_id + " is empty");
  }

  RetrieverTrainResult result{std::move(initial), {}, 0, class_weights_for(train, config.gamma)};
  RetrieverModel& model = result.model;
  nn::Adam adam(model.params(), {config.learning_rate, 0.9, 0.999, config.adam_epsilon, config.warmup_steps});
  Rng order_rng(derive_seed(config.seed, "retriever-order"));

  nn::ParameterStore best = model.params();
  double best_f1 = -1.0;
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      auto grads = model.params().zeros_like();
      for (std::size_t k = start; k < end; ++k) {
        const auto& p = train[order[k]];
        nn::Graph g(&model.params());
        const auto heads = model.forward(g, p.text);
        const auto loss = example_loss(g, heads, task_gold(p), result.weights, config.loss, end - start);
        loss_sum += g.value(loss)(0, 0) * static_cast<double>(end - start);
        g.backward(loss);
        g.accumulate(grads);
      }
      adam.step(model.params(), grads);
    }

    RetrieverEpoch log;
    log.epoch = epoch;
    log.steps = adam.steps();
    log.train_loss = loss_sum / static_cast<double>(train.size());
    const auto f1 = paragraph_macro_f1(validation, classify_all(model, validation));
    log.validation_evidence_f1 = f1.evidence;
    log.validation_sa_f1 = f1.sa;
    log.validation_si_f1 = f1.si;
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);

    // Ties go to the later epoch; only a strict gain resets the patience.
    if (f1.evidence >= best_f1) {
      best = model.params();
      result.best_epoch = epoch;
    }
    if (f1.evidence > best_f1) {
      best_f1 = f1.evidence;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  model.params() = best;
  return result;
}

}  // namespace scaner::retriever
