#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

#include "scaner/common/error.hpp"
#include "scaner/pipeline/stages.hpp"

using namespace scaner;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<long long> seed;
  std::string out;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "override the config seed");
  cmd->add_option("--out", opts.out, "override the config out_dir");
  for (const auto& key : pipeline::PipelineConfig::keys()) {
    if (key == "seed" || key == "out_dir") continue;
    cmd->add_option_function<std::string>(
           "--" + key, [&opts, key](const std::string& v) { opts.overrides[key] = v; },
           pipeline::PipelineConfig::description(key))
        ->group("Config overrides");
  }
}

pipeline::PipelineConfig resolve(const CommonOptions& opts) {
  auto config = opts.config_path.empty() ? pipeline::PipelineConfig() : pipeline::PipelineConfig::load(opts.config_path);
  for (const auto& [key, value] : opts.overrides) {
    config.set_from_text(key, value);
    std::cerr << "override " << key << " = " << config.get(key).dump() << "\n";
  }
  if (opts.seed) {
    config.set("seed", *opts.seed);
    std::cerr << "override seed = " << *opts.seed << "\n";
  }
  if (!opts.out.empty()) {
    config.set("out_dir", opts.out);
    std::cerr << "override out_dir = " << opts.out << "\n";
  }
  config.validate();
  return config;
}

void log_line(const std::string& line) { std::cerr << line << std::endl; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Suicide attempt and ideation detection from clinical notes"};
  app.require_subcommand(1);

  CommonOptions opts;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted evidence");
  auto* prepare = app.add_subcommand("prepare", "section, split, window, label and down-sample a corpus");
  auto* train = app.add_subcommand("train", "train the retriever or the stay predictor");
  auto* evaluate = app.add_subcommand("evaluate", "run the full pipeline on a split and write reports");
  auto* predict = app.add_subcommand("predict", "predict stay labels for the configured input notes");
  auto* stats = app.add_subcommand("stats", "print corpus statistics");
  for (auto* cmd : {synth, prepare, train, evaluate, predict, stats}) add_common(cmd, opts);

  std::string stage;
  train->add_option("--stage", stage, "retriever or predictor")
      ->required()
      ->check(CLI::IsMember({"retriever", "predictor"}));
  std::string split = "test";
  bool arithmetic_check = false;
  evaluate->add_option("--split", split, "train, validation or test")
      ->check(CLI::IsMember({"train", "validation", "test"}));
  evaluate->add_flag("--paper-arithmetic-check", arithmetic_check,
                     "recompute the published metric tables from their confusion matrices");
  bool stats_json = false;
  stats->add_flag("--json", stats_json, "print JSON instead of text");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = resolve(opts);
    if (synth->parsed()) {
      const auto s = pipeline::run_synth(config, log_line);
      std::cout << "stays " << s.stays << "\nnotes " << s.notes << "\nannotations " << s.annotations
                << "\nparagraphs " << s.paragraphs << "\nevidence_paragraphs " << s.evidence_paragraphs
                << "\ndirectory " << s.directory.string() << "\n";
    } else if (prepare->parsed()) {
      const auto s = pipeline::run_prepare(config, log_line);
      std::cout << s.stats.to_text() << "directory " << s.directory.string() << "\n";
    } else if (train->parsed()) {
      const auto s = stage == "retriever" ? pipeline::run_train_retriever(config, log_line)
                                          : pipeline::run_train_predictor(config, log_line);
      std::cout << "epochs " << s.epochs << "\nbest_epoch " << s.best_epoch << "\ncheckpoint " << s.checkpoint.string()
                << "\ncheckpoint_sha256 " << s.checkpoint_sha256 << "\n";
      if (!s.retriever_sha256.empty()) std::cout << "retriever_sha256 " << s.retriever_sha256 << "\n";
    } else if (evaluate->parsed()) {
      const auto s = pipeline::run_evaluate(config, corpus::parse_split_name(split), arithmetic_check, log_line);
      std::cout << s.report.to_text() << "directory " << s.directory.string() << "\n";
      if (s.report.arithmetic && !s.report.arithmetic->pass()) {
        std::cerr << "error: published metric tables do not match their confusion matrices\n";
        return 2;
      }
    } else if (predict->parsed()) {
      std::cout << (pipeline::run_predict(config, log_line) / "stay_predictions.jsonl").string() << "\n";
    } else if (stats->parsed()) {
      const auto report = pipeline::run_stats(config);
      std::cout << (stats_json ? report.to_json().dump(2) + "\n" : report.to_text());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
