#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scaner/common/jsonl.hpp"
#include "scaner/corpus/paragraphs.hpp"
#include "scaner/corpus/split.hpp"
#include "scaner/predictor/model.hpp"
#include "scaner/predictor/pipeline.hpp"
#include "scaner/retriever/encoder.hpp"
#include "scaner/retriever/model.hpp"
#include "scaner/synth/generator.hpp"

namespace scaner::pipeline {

// Flat key/value configuration. Every key has a default; a config file may
// set any subset. Unknown keys are rejected.
class PipelineConfig {
 public:
  PipelineConfig();

  static PipelineConfig from_json(const Json& j);
  static PipelineConfig load(const std::filesystem::path& path);

  // Sets one key from its textual command-line form, parsed as the key's
  // JSON type (strings may be given bare). Throws ConfigError.
  void set_from_text(const std::string& key, const std::string& text);
  void set(const std::string& key, const Json& value);
  const Json& get(const std::string& key) const;

  static const std::vector<std::string>& keys();
  static std::string description(const std::string& key);

  const Json& values() const { return values_; }
  // SHA-256 of the canonical dump of the resolved config.
  std::string hash() const;

  // The config keys `stage` reads ("synth", "prepare", "retriever",
  // "predictor", "evaluate", "predict").
  Json stage_values(const std::string& stage) const;
  // <out_dir>/<label>-<key>, the key hashing the stage's config values and
  // the fingerprints of its inputs.
  std::filesystem::path run_dir(const std::string& stage, const std::string& label, const Json& inputs) const;

  std::uint64_t seed() const;
  std::filesystem::path out_dir() const;
  std::filesystem::path template_dir() const;
  // Configured input files, or the synth run of this config.
  corpus::CorpusPaths input_paths() const;
  corpus::WindowConfig window() const;
  corpus::SplitRatios ratios() const;
  double downsample_fraction() const;
  synth::SynthSpec synth_spec() const;
  retriever::ToyEncoderConfig encoder_config() const;
  retriever::RetrieverTrainConfig retriever_config() const;
  predictor::PredictorConfig predictor_config(std::size_t dim) const;
  predictor::PredictorTrainConfig predictor_train_config() const;

  // Throws ConfigError naming the first inconsistent value.
  void validate() const;

 private:
  Json values_;
};

}  // namespace scaner::pipeline
