#include "scaner/predictor/pipeline.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "scaner/common/error.hpp"
#include "scaner/metrics/metrics.hpp"
#include "scaner/nn/adam.hpp"

namespace scaner::predictor {

std::vector<std::size_t> StayParagraphs::gold_evidence() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (paragraphs[i].evidence == Evidence::Yes) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> StayParagraphs::gold_pool() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (paragraphs[i].evidence == Evidence::No) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> StayParagraphs::retrieved() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].evidence_label() == Evidence::Yes) out.push_back(i);
  }
  return out;
}

StayParagraphs encode_stay(const retriever::RetrieverModel& retriever, const corpus::HospitalStay& stay,
                           const std::vector<corpus::Paragraph>& paragraphs) {
  if (stay.note_ids.empty()) throw DataError("stay " + stay.stay_id + " has no notes");
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < stay.note_ids.size(); ++i) rank.emplace(stay.note_ids[i], i);
  StayParagraphs out;
  out.stay = stay;
  for (const auto& p : paragraphs) {
    if (rank.count(p.note_id)) out.paragraphs.push_back(p);
  }
  if (out.paragraphs.empty()) throw DataError("stay " + stay.stay_id + " has no paragraphs after preprocessing");
  std::stable_sort(out.paragraphs.begin(), out.paragraphs.end(), [&](const auto& a, const auto& b) {
    const auto ra = rank[a.note_id], rb = rank[b.note_id];
    return ra != rb ? ra < rb : a.paragraph_id < b.paragraph_id;
  });
  out.vectors.resize(static_cast<Eigen::Index>(out.paragraphs.size()), static_cast<Eigen::Index>(retriever.dim()));
  for (std::size_t i = 0; i < out.paragraphs.size(); ++i) {
    Eigen::RowVectorXd v;
    out.scores.push_back(retriever.classify(out.paragraphs[i].text, &v));
    out.vectors.row(static_cast<Eigen::Index>(i)) = v;
  }
  return out;
}

std::vector<StayParagraphs> encode_stays(const retriever::RetrieverModel& retriever,
                                         const std::vector<corpus::HospitalStay>& stays,
                                         const std::vector<corpus::Paragraph>& paragraphs) {
  std::map<std::string, std::vector<corpus::Paragraph>> by_stay;
  for (const auto& p : paragraphs) by_stay[p.stay_id].push_back(p);
  std::vector<StayParagraphs> out;
  out.reserve(stays.size());
  for (const auto& s : stays) out.push_back(encode_stay(retriever, s, by_stay[s.stay_id]));
  return out;
}

namespace {

nn::Matrix select_rows(const nn::Matrix& m, const std::vector<std::size_t>& rows) {
  nn::Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

template <std::size_t N>
Json probs(const std::array<double, N>& p) {
  return Json(std::vector<double>(p.begin(), p.end()));
}

}  // namespace

Json StayPredictionRecord::to_json() const {
  Json j;
  j["stay_id"] = stay_id;
  j["sa_label"] = to_string(prediction.sa_label());
  j["sa_probs"] = probs(prediction.sa);
  j["si_label"] = to_string(prediction.si_label());
  j["si_probs"] = probs(prediction.si);
  j["evidence_paragraph_ids"] = evidence_paragraph_ids;
  j["fallback"] = fallback;
  return j;
}

StayPredictionRecord predict_from_paragraphs(const StayPredictor& predictor, const StayParagraphs& stay,
                                             const CountDistribution& neutral_counts, Rng& rng) {
  StayPredictionRecord r;
  r.stay_id = stay.stay.stay_id;
  auto rows = stay.retrieved();
  if (rows.empty()) {
    std::vector<std::size_t> all(stay.paragraphs.size());
    std::iota(all.begin(), all.end(), 0);
    rows = sample_paragraphs(all, neutral_counts, rng);
    r.fallback = true;
  }
  for (auto i : rows) r.evidence_paragraph_ids.push_back(stay.paragraphs[i].paragraph_id);
  r.prediction = predictor.predict(select_rows(stay.vectors, rows));
  return r;
}

StayPredictionRecord infer_stay_pipeline(const retriever::RetrieverModel& retriever, const StayPredictor& predictor,
                                         const corpus::HospitalStay& stay,
                                         const std::vector<corpus::Paragraph>& paragraphs,
                                         const CountDistribution& neutral_counts, Rng& rng) {
  return predict_from_paragraphs(predictor, encode_stay(retriever, stay, paragraphs), neutral_counts, rng);
}

Rng stay_rng(std::uint64_t seed, const std::string& stay_id) { return Rng(derive_seed(seed, "infer:" + stay_id)); }

void PredictorTrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("predictor learning_rate must be positive");
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
  if (batch_size == 0 || epochs == 0) throw ConfigError("predictor batch_size and epochs must be positive");
  if (!(irrelevant_prob >= 0.0 && irrelevant_prob <= 1.0)) throw ConfigError("irrelevant_prob must be in [0, 1]");
}

Json PredictorTrainConfig::to_json() const {
  Json j;
  j["learning_rate"] = learning_rate;
  j["warmup_steps"] = warmup_steps;
  j["adam_epsilon"] = adam_epsilon;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["seed"] = seed;
  j["irrelevant_prob"] = irrelevant_prob;
  return j;
}

Json PredictorEpoch::to_json() const {
  Json j;
  j["epoch"] = epoch;
  j["steps"] = steps;
  j["train_loss"] = train_loss;
  j["validation_sa_macro_f1"] = validation_sa_f1;
  j["validation_si_macro_f1"] = validation_si_f1;
  return j;
}

StayTaskF1 stay_macro_f1(const std::vector<StayParagraphs>& stays, const std::vector<StayPredictionRecord>& records) {
  if (stays.size() != records.size()) throw DataError("stay and prediction counts differ");
  std::vector<std::size_t> gs, ps, gi, pi;
  for (std::size_t i = 0; i < stays.size(); ++i) {
    gs.push_back(index_of(stays[i].stay.sa_label));
    ps.push_back(index_of(records[i].prediction.sa_label()));
    gi.push_back(index_of(stays[i].stay.si_label));
    pi.push_back(index_of(records[i].prediction.si_label()));
  }
  const std::vector<std::string> three(3);
  return {metrics::class_metrics(metrics::confusion_matrix(gs, ps, three)).overall.f1,
          metrics::class_metrics(metrics::confusion_matrix(gi, pi, three)).overall.f1};
}

PredictorTrainResult train_predictor(StayPredictor initial, const std::vector<StayParagraphs>& train,
                                     const std::vector<StayParagraphs>& validation,
                                     const PredictorTrainConfig& config, const PredictorEpochCallback& on_epoch) {
  config.validate();
  if (train.empty()) throw DataError("predictor training set is empty");
  if (validation.empty()) throw DataError("predictor validation set is empty");

  std::vector<std::size_t> counts;
  std::array<std::size_t, 3> sa_seen{};
  for (const auto& s : train) {
    ++sa_seen[index_of(s.stay.sa_label)];
    const auto ev = s.gold_evidence();
    const bool neutral = s.stay.sa_label == SaLabel::Neutral && s.stay.si_label == SiLabel::Neutral;
    if (!neutral && ev.empty()) {
      throw DataError("non-neutral training stay " + s.stay.stay_id + " has no gold evidence paragraph");
    }
    if (!neutral) counts.push_back(ev.size());
  }
  PredictorTrainResult result{std::move(initial), build_neutral_count_distribution(counts), {}, 0, {}};
  for (std::size_t c = 0; c < 3; ++c) {
    if (sa_seen[c] == 0) {
      result.warnings.push_back(std::string("training stays contain no SA class '") +
                                std::string(to_string(static_cast<SaLabel>(c))) + "'");
    }
  }

  StayPredictor& model = result.model;
  NoiseConfig noise{config.irrelevant_prob, result.neutral_counts};
  nn::Adam adam(model.params(), {config.learning_rate, 0.9, 0.999, config.adam_epsilon, config.warmup_steps});
  Rng rng(derive_seed(config.seed, "predictor-train"));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  nn::ParameterStore best = model.params();
  double best_score = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      auto grads = model.params().zeros_like();
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = train[order[k]];
        const auto rows = assemble_training_input(s.gold_evidence(), s.gold_pool(), noise, rng);
        nn::Graph g(&model.params());
        const auto f = model.forward(g, select_rows(s.vectors, rows));
        const auto loss = g.add(g.cross_entropy(f.sa, index_of(s.stay.sa_label), inv),
                                g.cross_entropy(f.si, index_of(s.stay.si_label), inv));
        loss_sum += g.value(loss)(0, 0) / inv;
        g.backward(loss);
        g.accumulate(grads);
      }
      adam.step(model.params(), grads);
    }

    std::vector<StayPredictionRecord> records;
    for (const auto& s : validation) {
      auto r = stay_rng(config.seed, s.stay.stay_id);
      records.push_back(predict_from_paragraphs(model, s, result.neutral_counts, r));
    }
    const auto f1 = stay_macro_f1(validation, records);
    PredictorEpoch log{epoch, adam.steps(), loss_sum / static_cast<double>(train.size()), f1.sa, f1.si};
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
    if (log.validation_mean() >= best_score) {
      best_score = log.validation_mean();
      best = model.params();
      result.best_epoch = epoch;
    }
  }
  model.params() = best;
  return result;
}

}  // namespace scaner::predictor
