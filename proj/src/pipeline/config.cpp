#include "scaner/pipeline/config.hpp"

#include <algorithm>
#include <map>

#include "scaner/common/error.hpp"
#include "scaner/common/hash.hpp"

namespace scaner::pipeline {

namespace {

struct KeySpec {
  const char* key;
  Json value;
  const char* help;
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs{
      {"seed", 1, "master seed for splits, sampling, initialization and inference"},
      {"out_dir", "runs", "root directory for stage outputs"},
      {"notes_path", "", "notes.jsonl to prepare (default: the synth run for this config)"},
      {"annotations_path", "", "annotations.jsonl to prepare"},
      {"stays_path", "", "stays.jsonl to prepare"},
      {"template_dir", "", "synthetic template directory (default: bundled templates)"},
      {"synth_n_stays", 500, "number of synthetic stays"},
      {"synth_notes_per_stay", Json::array({2, 4}), "[lo, hi] notes per synthetic stay"},
      {"synth_sentences_per_note", Json::array({12, 40}), "[lo, hi] filler sentences per note"},
      {"synth_evidence_sentences", Json::array({1, 3}), "[lo, hi] planted sentences per positive label"},
      {"synth_extra_neutral_stays", 0, "trailing synthetic stays forced to (neutral, neutral)"},
      {"synth_label_mix", nullptr, "object \"sa,si\" -> probability; null uses the training-split marginals"},
      {"window_size", 20, "sentences per paragraph window"},
      {"overlap", 5, "sentences shared by consecutive windows"},
      {"downsample_fraction", 0.1, "share of no-evidence training paragraphs removed"},
      {"train_ratio", 0.7, "stay share of the training split"},
      {"validation_ratio", 0.1, "stay share of the validation split"},
      {"test_ratio", 0.2, "stay share of the test split"},
      {"encoder", "toy", "paragraph encoder kind"},
      {"encoder_dim", 48, "paragraph vector width"},
      {"max_tokens", 512, "tokens read per paragraph"},
      {"retriever_learning_rate", 2e-5, "retriever Adam learning rate"},
      {"retriever_warmup_steps", 2000, "retriever linear warmup steps"},
      {"retriever_batch_size", 16, "paragraphs per retriever update"},
      {"retriever_max_epochs", 20, "retriever epoch limit"},
      {"retriever_patience", 3, "epochs without validation gain before stopping"},
      {"adam_epsilon", 1e-8, "Adam epsilon for both modules"},
      {"gamma", 2.5, "class-weight smoothing constant"},
      {"alpha", 1.1, "SA auxiliary loss weight"},
      {"beta", 1.5, "SI auxiliary loss weight"},
      {"attention_heads", 3, "predictor attention heads"},
      {"attention_layers", 2, "predictor attention layers"},
      {"predictor_learning_rate", 1e-3, "predictor Adam learning rate"},
      {"predictor_warmup_steps", 1200, "predictor linear warmup steps"},
      {"predictor_batch_size", 16, "stays per predictor update"},
      {"predictor_epochs", 30, "predictor epochs"},
      {"irrelevant_prob", 0.05, "chance of adding each irrelevant paragraph during predictor training"},
  };
  return specs;
}

// Config keys each stage reads; they name the stage's run directory.
const std::map<std::string, std::vector<std::string>>& stage_keys() {
  static const std::map<std::string, std::vector<std::string>> m{
      {"synth",
       {"seed", "template_dir", "synth_n_stays", "synth_notes_per_stay", "synth_sentences_per_note",
        "synth_evidence_sentences", "synth_extra_neutral_stays", "synth_label_mix"}},
      {"prepare",
       {"seed", "window_size", "overlap", "downsample_fraction", "train_ratio", "validation_ratio", "test_ratio"}},
      {"retriever",
       {"seed", "encoder", "encoder_dim", "max_tokens", "retriever_learning_rate", "retriever_warmup_steps",
        "retriever_batch_size", "retriever_max_epochs", "retriever_patience", "adam_epsilon", "gamma", "alpha",
        "beta"}},
      {"predictor",
       {"seed", "attention_heads", "attention_layers", "predictor_learning_rate", "predictor_warmup_steps",
        "predictor_batch_size", "predictor_epochs", "adam_epsilon", "irrelevant_prob"}},
      {"evaluate", {"seed"}},
      {"predict", {"seed", "window_size", "overlap"}},
  };
  return m;
}

const KeySpec& spec_of(const std::string& key) {
  for (const auto& s : key_specs()) {
    if (key == s.key) return s;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

bool same_kind(const Json& expected, const Json& value) {
  if (expected.is_null()) return value.is_null() || value.is_object();
  if (expected.is_number_integer()) return value.is_number_integer();
  if (expected.is_number()) return value.is_number();
  if (expected.is_string()) return value.is_string();
  if (expected.is_array()) return value.is_array();
  return expected.type() == value.type();
}

const char* kind_name(const Json& expected) {
  if (expected.is_null()) return "an object or null";
  if (expected.is_number_integer()) return "an integer";
  if (expected.is_number()) return "a number";
  if (expected.is_string()) return "a string";
  if (expected.is_array()) return "an array";
  return "a value";
}

synth::IntRange range_of(const Json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ConfigError(key + " must be [lo, hi] integers");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

PipelineConfig::PipelineConfig() : values_(Json::object()) {
  for (const auto& s : key_specs()) values_[s.key] = s.value;
}

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& s : key_specs()) out.emplace_back(s.key);
    return out;
  }();
  return k;
}

std::string PipelineConfig::description(const std::string& key) { return spec_of(key).help; }

void PipelineConfig::set(const std::string& key, const Json& value) {
  const auto& s = spec_of(key);
  if (!same_kind(s.value, value)) throw ConfigError("config key '" + key + "' must be " + kind_name(s.value));
  values_[key] = value;
}

void PipelineConfig::set_from_text(const std::string& key, const std::string& text) {
  const auto& s = spec_of(key);
  if (s.value.is_string()) {
    set(key, Json(text));
    return;
  }
  Json parsed;
  try {
    parsed = Json::parse(text);
  } catch (const Json::parse_error&) {
    throw ConfigError("cannot parse value '" + text + "' for config key '" + key + "'");
  }
  set(key, parsed);
}

const Json& PipelineConfig::get(const std::string& key) const {
  spec_of(key);
  return values_.at(key);
}

PipelineConfig PipelineConfig::from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  for (const auto& [key, value] : j.items()) c.set(key, value);
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  try {
    return from_json(read_json(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string PipelineConfig::hash() const { return sha256_hex(values_.dump()); }

Json PipelineConfig::stage_values(const std::string& stage) const {
  auto it = stage_keys().find(stage);
  if (it == stage_keys().end()) throw ConfigError("unknown stage '" + stage + "'");
  Json j = Json::object();
  for (const auto& key : it->second) j[key] = values_.at(key);
  return j;
}

std::filesystem::path PipelineConfig::run_dir(const std::string& stage, const std::string& label,
                                              const Json& inputs) const {
  const Json id{{"stage", stage}, {"config", stage_values(stage)}, {"inputs", inputs}};
  return out_dir() / (label + "-" + sha256_hex(id.dump()).substr(0, 16));
}

std::uint64_t PipelineConfig::seed() const { return values_.at("seed").get<std::uint64_t>(); }
std::filesystem::path PipelineConfig::out_dir() const { return values_.at("out_dir").get<std::string>(); }

std::filesystem::path PipelineConfig::template_dir() const {
  const auto dir = values_.at("template_dir").get<std::string>();
  return dir.empty() ? synth::default_template_dir() : std::filesystem::path(dir);
}

corpus::CorpusPaths PipelineConfig::input_paths() const {
  auto paths = corpus::CorpusPaths::in_directory(run_dir("synth", "corpus", Json::object()));
  const auto notes = values_.at("notes_path").get<std::string>();
  if (!notes.empty()) {
    paths.notes = notes;
    paths.annotations = values_.at("annotations_path").get<std::string>();
    paths.stays = values_.at("stays_path").get<std::string>();
  }
  return paths;
}

corpus::WindowConfig PipelineConfig::window() const {
  return {values_.at("window_size").get<std::size_t>(), values_.at("overlap").get<std::size_t>()};
}

corpus::SplitRatios PipelineConfig::ratios() const {
  return {values_.at("train_ratio").get<double>(), values_.at("validation_ratio").get<double>(),
          values_.at("test_ratio").get<double>()};
}

double PipelineConfig::downsample_fraction() const { return values_.at("downsample_fraction").get<double>(); }

synth::SynthSpec PipelineConfig::synth_spec() const {
  synth::SynthSpec s;
  s.n_stays = values_.at("synth_n_stays").get<std::size_t>();
  s.notes_per_stay = range_of(values_.at("synth_notes_per_stay"), "synth_notes_per_stay");
  s.sentences_per_note = range_of(values_.at("synth_sentences_per_note"), "synth_sentences_per_note");
  s.evidence_sentences_per_positive_stay = range_of(values_.at("synth_evidence_sentences"), "synth_evidence_sentences");
  s.extra_neutral_stays = values_.at("synth_extra_neutral_stays").get<std::size_t>();
  s.seed = seed();
  s.window = window();
  const auto& mix = values_.at("synth_label_mix");
  if (mix.is_object()) {
    s.label_mix = {};
    for (const auto& [key, p] : mix.items()) {
      const auto comma = key.find(',');
      if (comma == std::string::npos || !p.is_number()) {
        throw ConfigError("synth_label_mix entries must look like \"positive,neutral\": probability");
      }
      try {
        const auto sa = parse_sa_label(key.substr(0, comma));
        const auto si = parse_si_label(key.substr(comma + 1));
        s.label_mix[synth::mix_index(sa, si)] = p.get<double>();
      } catch (const DataError& e) {
        throw ConfigError(std::string("synth_label_mix: ") + e.what());
      }
    }
  }
  return s;
}

retriever::ToyEncoderConfig PipelineConfig::encoder_config() const {
  retriever::ToyEncoderConfig c;
  c.dim = values_.at("encoder_dim").get<std::size_t>();
  c.max_tokens = values_.at("max_tokens").get<std::size_t>();
  return c;
}

retriever::RetrieverTrainConfig PipelineConfig::retriever_config() const {
  retriever::RetrieverTrainConfig c;
  c.learning_rate = values_.at("retriever_learning_rate").get<double>();
  c.warmup_steps = values_.at("retriever_warmup_steps").get<std::size_t>();
  c.adam_epsilon = values_.at("adam_epsilon").get<double>();
  c.batch_size = values_.at("retriever_batch_size").get<std::size_t>();
  c.max_epochs = values_.at("retriever_max_epochs").get<std::size_t>();
  c.patience = values_.at("retriever_patience").get<std::size_t>();
  c.seed = seed();
  c.gamma = values_.at("gamma").get<double>();
  c.loss = {values_.at("alpha").get<double>(), values_.at("beta").get<double>()};
  return c;
}

predictor::PredictorConfig PipelineConfig::predictor_config(std::size_t dim) const {
  predictor::PredictorConfig c;
  c.dim = dim;
  c.heads = values_.at("attention_heads").get<std::size_t>();
  c.layers = values_.at("attention_layers").get<std::size_t>();
  return c;
}

predictor::PredictorTrainConfig PipelineConfig::predictor_train_config() const {
  predictor::PredictorTrainConfig c;
  c.learning_rate = values_.at("predictor_learning_rate").get<double>();
  c.warmup_steps = values_.at("predictor_warmup_steps").get<std::size_t>();
  c.adam_epsilon = values_.at("adam_epsilon").get<double>();
  c.batch_size = values_.at("predictor_batch_size").get<std::size_t>();
  c.epochs = values_.at("predictor_epochs").get<std::size_t>();
  c.seed = seed();
  c.irrelevant_prob = values_.at("irrelevant_prob").get<double>();
  return c;
}

void PipelineConfig::validate() const {
  for (const auto& key : {"seed", "synth_n_stays", "synth_extra_neutral_stays", "window_size", "overlap",
                          "encoder_dim", "max_tokens", "retriever_warmup_steps", "retriever_batch_size",
                          "retriever_max_epochs", "retriever_patience", "attention_heads", "attention_layers",
                          "predictor_warmup_steps", "predictor_batch_size", "predictor_epochs"}) {
    if (values_.at(key).get<long long>() < 0) throw ConfigError(std::string(key) + " must be non-negative");
  }
  if (values_.at("encoder").get<std::string>() != "toy") {
    throw ConfigError("encoder '" + values_.at("encoder").get<std::string>() + "' is not available; use \"toy\"");
  }
  const auto w = window();
  if (w.window == 0 || w.window <= w.overlap) throw ConfigError("window_size must exceed overlap");
  const auto r = ratios();
  if (r.train <= 0 || r.validation <= 0 || r.test <= 0 || std::abs(r.train + r.validation + r.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be positive and sum to 1");
  }
  const double f = downsample_fraction();
  if (!(f >= 0.0 && f < 1.0)) throw ConfigError("downsample_fraction must be in [0, 1)");
  synth_spec().validate();
  retriever_config().validate();
  predictor_train_config().validate();
  predictor_config(encoder_config().dim).validate();
}

}  // namespace scaner::pipeline
