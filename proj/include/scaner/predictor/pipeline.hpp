#pragma once

#include <functional>
#include <string>
#include <vector>

#include "scaner/corpus/types.hpp"
#include "scaner/predictor/model.hpp"
#include "scaner/predictor/noise.hpp"
#include "scaner/retriever/model.hpp"

namespace scaner::predictor {

// A stay's paragraphs in note/window order with their frozen retriever
// outputs.
struct StayParagraphs {
  corpus::HospitalStay stay;
  std::vector<corpus::Paragraph> paragraphs;
  std::vector<retriever::ParagraphScores> scores;
  nn::Matrix vectors;  // one row per paragraph

  std::vector<std::size_t> gold_evidence() const;
  std::vector<std::size_t> gold_pool() const;
  std::vector<std::size_t> retrieved() const;
};

// Runs the retriever over every paragraph of `stay` found in `paragraphs`.
// Throws DataError when the stay has no notes or no paragraphs.
StayParagraphs encode_stay(const retriever::RetrieverModel& retriever, const corpus::HospitalStay& stay,
                           const std::vector<corpus::Paragraph>& paragraphs);

std::vector<StayParagraphs> encode_stays(const retriever::RetrieverModel& retriever,
                                         const std::vector<corpus::HospitalStay>& stays,
                                         const std::vector<corpus::Paragraph>& paragraphs);

struct StayPredictionRecord {
  std::string stay_id;
  StayPrediction prediction;
  std::vector<std::string> evidence_paragraph_ids;  // paragraphs the predictor consumed
  bool fallback = false;                           // true when nothing was retrieved

  Json to_json() const;
};

// Predicts from retrieved evidence, or from X sampled paragraphs when
// nothing was retrieved.
StayPredictionRecord predict_from_paragraphs(const StayPredictor& predictor, const StayParagraphs& stay,
                                             const CountDistribution& neutral_counts, Rng& rng);

StayPredictionRecord infer_stay_pipeline(const retriever::RetrieverModel& retriever, const StayPredictor& predictor,
                                         const corpus::HospitalStay& stay,
                                         const std::vector<corpus::Paragraph>& paragraphs,
                                         const CountDistribution& neutral_counts, Rng& rng);

// Per-stay inference stream, independent of evaluation order.
Rng stay_rng(std::uint64_t seed, const std::string& stay_id);

struct PredictorTrainConfig {
  double learning_rate = 1e-3;
  std::size_t warmup_steps = 1200;
  double adam_epsilon = 1e-8;
  std::size_t batch_size = 16;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  double irrelevant_prob = 0.05;

  void validate() const;
  Json to_json() const;
};

struct PredictorEpoch {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double train_loss = 0.0;
  double validation_sa_f1 = 0.0;
  double validation_si_f1 = 0.0;

  double validation_mean() const { return 0.5 * (validation_sa_f1 + validation_si_f1); }
  Json to_json() const;
};

struct PredictorTrainResult {
  StayPredictor model;
  CountDistribution neutral_counts;
  std::vector<PredictorEpoch> log;
  std::size_t best_epoch = 0;
  std::vector<std::string> warnings;
};

using PredictorEpochCallback = std::function<void(const PredictorEpoch&)>;

// Trains on gold evidence plus sampled noise; the retriever is only read.
// Validation runs the full inference path on `validation`.
PredictorTrainResult train_predictor(StayPredictor initial, const std::vector<StayParagraphs>& train,
                                     const std::vector<StayParagraphs>& validation,
                                     const PredictorTrainConfig& config, const PredictorEpochCallback& on_epoch = {});

struct StayTaskF1 {
  double sa = 0.0;
  double si = 0.0;
};

StayTaskF1 stay_macro_f1(const std::vector<StayParagraphs>& stays, const std::vector<StayPredictionRecord>& records);

}  // namespace scaner::predictor
