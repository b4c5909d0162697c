#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "scaner/corpus/types.hpp"
#include "scaner/nn/checkpoint.hpp"
#include "scaner/retriever/encoder.hpp"
#include "scaner/retriever/loss.hpp"

namespace scaner::retriever {

struct ParagraphScores {
  std::array<double, 2> evidence{};  // yes, no
  std::array<double, 3> sa{};        // positive, neg_unsure, neutral
  std::array<double, 3> si{};        // positive, negative, neutral

  Evidence evidence_label() const;
  SaLabel sa_label() const;
  SiLabel si_label() const;
};

class RetrieverModel {
 public:
  static constexpr const char* kCheckpointKind = "retriever";

  // Fresh model with seeded initial parameters.
  RetrieverModel(std::shared_ptr<const Encoder> encoder, std::uint64_t seed);

  HeadVars forward(nn::Graph& graph, std::string_view text) const;

  // Throws DataError on empty text. When `vector` is given it receives the
  // encoder output for the same pass.
  ParagraphScores classify(std::string_view text, Eigen::RowVectorXd* vector = nullptr) const;
  Eigen::RowVectorXd encode(std::string_view text) const;

  const Encoder& encoder() const { return *encoder_; }
  std::size_t dim() const { return encoder_->dim(); }
  const nn::ParameterStore& params() const { return params_; }
  nn::ParameterStore& params() { return params_; }

  // `training` is stored verbatim in the checkpoint metadata.
  nn::Checkpoint to_checkpoint(const Json& training = Json::object()) const;
  // Throws DataError on a different kind or class ordering.
  static RetrieverModel from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  RetrieverModel(std::shared_ptr<const Encoder> encoder, nn::ParameterStore params);

  std::shared_ptr<const Encoder> encoder_;
  nn::ParameterStore params_;
};

Json retriever_class_orders();

inline ParagraphScores classify_paragraph(const RetrieverModel& model, std::string_view text) {
  return model.classify(text);
}

struct RetrievedParagraph {
  corpus::Paragraph paragraph;
  ParagraphScores scores;
  Eigen::RowVectorXd vector;
};

// Every paragraph of the stay predicted evidence=yes, in note order then
// window order. `paragraphs` may contain other stays' paragraphs. Throws
// DataError if the stay has no notes.
std::vector<RetrievedParagraph> retrieve_evidence(const RetrieverModel& model, const corpus::HospitalStay& stay,
                                                  const std::vector<corpus::Paragraph>& paragraphs);

// paragraph_predictions.jsonl record.
Json paragraph_prediction_json(const std::string& paragraph_id, const ParagraphScores& scores);

struct RetrieverTrainConfig {
  double learning_rate = 2e-5;
  std::size_t warmup_steps = 2000;
  double adam_epsilon = 1e-8;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 20;
  std::size_t patience = 3;
  std::uint64_t seed = 1;
  double gamma = 2.5;
  LossConfig loss;

  void validate() const;
  Json to_json() const;
};

struct RetrieverEpoch {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double train_loss = 0.0;
  double validation_evidence_f1 = 0.0;
  double validation_sa_f1 = 0.0;
  double validation_si_f1 = 0.0;

  Json to_json() const;
};

struct RetrieverTrainResult {
  RetrieverModel model;
  std::vector<RetrieverEpoch> log;
  std::size_t best_epoch = 0;
  ClassWeights weights;
};

using EpochCallback = std::function<void(const RetrieverEpoch&)>;

// Throws DataError on an empty training or validation set.
RetrieverTrainResult train_retriever(RetrieverModel initial, const std::vector<corpus::Paragraph>& train,
                                     const std::vector<corpus::Paragraph>& validation,
                                     const RetrieverTrainConfig& config, const EpochCallback& on_epoch = {});

// Macro-F1 of the three tasks on a labeled paragraph set.
struct ParagraphTaskF1 {
  double evidence = 0.0;
  double sa = 0.0;
  double si = 0.0;
};

ParagraphTaskF1 paragraph_macro_f1(const std::vector<corpus::Paragraph>& paragraphs,
                                   const std::vector<ParagraphScores>& scores);

std::vector<ParagraphScores> classify_all(const RetrieverModel& model, const std::vector<corpus::Paragraph>& paragraphs);

}  // namespace scaner::retriever
