#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "scaner/corpus/split.hpp"
#include "scaner/corpus/stats.hpp"
#include "scaner/metrics/report.hpp"
#include "scaner/pipeline/config.hpp"

namespace scaner::pipeline {

// Every stage writes to <out_dir>/<label>-<key>, where the key hashes the
// config values the stage reads and the fingerprints of its inputs (corpus
// files, prepared data, upstream checkpoints). Later stages recompute the
// key to find their inputs, so artifacts built from different settings never
// mix. Each directory holds a run.json with the resolved config.
inline constexpr const char* kRetrieverCheckpoint = "retriever.ckpt";
inline constexpr const char* kPredictorCheckpoint = "predictor.ckpt";

using Logger = std::function<void(const std::string&)>;

struct SynthSummary {
  std::size_t stays = 0;
  std::size_t notes = 0;
  std::size_t annotations = 0;
  std::size_t paragraphs = 0;
  std::size_t evidence_paragraphs = 0;
  std::filesystem::path directory;
};

SynthSummary run_synth(const PipelineConfig& config, const Logger& log = {});

// Loaded prepare-stage artifacts.
struct PreparedData {
  std::vector<corpus::HospitalStay> stays;
  std::vector<corpus::Paragraph> paragraphs;        // every paragraph, corpus order
  std::vector<corpus::Paragraph> train_paragraphs;  // training split after down-sampling
  corpus::DatasetSplit split;
  std::string fingerprint;
  std::filesystem::path directory;

  std::vector<corpus::HospitalStay> stays_in(corpus::SplitName s) const;
  std::vector<corpus::Paragraph> paragraphs_in(corpus::SplitName s) const;
};

struct PrepareSummary {
  corpus::StatsReport stats;
  std::string fingerprint;
  std::filesystem::path directory;
};

PrepareSummary run_prepare(const PipelineConfig& config, const Logger& log = {});
// The prepare run for the config's input files. Throws DataError when it
// does not exist or its files were modified.
std::filesystem::path prepared_dir(const PipelineConfig& config);
PreparedData load_prepared(const std::filesystem::path& dir);
PreparedData load_prepared(const PipelineConfig& config);

std::filesystem::path retriever_dir(const PipelineConfig& config, const PreparedData& data);
std::filesystem::path predictor_dir(const PipelineConfig& config, const PreparedData& data,
                                    const std::string& retriever_sha256);

struct TrainSummary {
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  std::string checkpoint_sha256;
  std::string retriever_sha256;  // predictor stage only
  std::vector<std::string> warnings;
  std::filesystem::path checkpoint;
};

TrainSummary run_train_retriever(const PipelineConfig& config, const Logger& log = {});
// Throws DataError when no retriever was trained for this config and
// prepared data.
TrainSummary run_train_predictor(const PipelineConfig& config, const Logger& log = {});

struct EvaluateSummary {
  metrics::EvaluationReport report;
  std::filesystem::path directory;
};

// Full inference on one split. With `arithmetic_check` the report also carries
// the published-table arithmetic check.
EvaluateSummary run_evaluate(const PipelineConfig& config, corpus::SplitName split, bool arithmetic_check,
                             const Logger& log = {});

// Preprocesses the configured input notes (annotations optional) and writes
// paragraph and stay predictions for every stay.
std::filesystem::path run_predict(const PipelineConfig& config, const Logger& log = {});

// Stats of the prepared data, or of the raw input corpus when nothing has
// been prepared yet.
corpus::StatsReport run_stats(const PipelineConfig& config);

}  // namespace scaner::pipeline
