#include "scaner/pipeline/stages.hpp"

#include <map>
#include <set>

#include "scaner/common/error.hpp"
#include "scaner/common/hash.hpp"
#include "scaner/nn/checkpoint.hpp"
#include "scaner/predictor/pipeline.hpp"
#include "scaner/synth/generator.hpp"

namespace scaner::pipeline {

namespace fs = std::filesystem;

namespace {

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

std::string files_fingerprint(const std::vector<fs::path>& files) {
  std::string joined;
  for (const auto& f : files) joined += f.filename().string() + ":" + sha256_file(f) + "\n";
  return sha256_hex(joined);
}

std::string input_fingerprint(const corpus::CorpusPaths& paths) {
  if (!fs::exists(paths.notes)) {
    throw DataError("notes file " + paths.notes.string() + " not found; run 'synth' or set notes_path");
  }
  std::vector<fs::path> inputs{paths.notes};
  if (!paths.annotations.empty()) inputs.push_back(paths.annotations);
  if (!paths.stays.empty()) inputs.push_back(paths.stays);
  return files_fingerprint(inputs);
}

std::string prepared_fingerprint(const fs::path& dir) {
  return files_fingerprint(
      {dir / "paragraphs.jsonl", dir / "train_paragraphs.jsonl", dir / "splits.json", dir / "stays.jsonl"});
}

void write_run(const fs::path& dir, const PipelineConfig& config, const Json& extra) {
  Json j;
  j["config"] = config.values();
  j["config_sha256"] = config.hash();
  for (const auto& [k, v] : extra.items()) j[k] = v;
  write_json(dir / "run.json", j);
}

Json stay_json(const corpus::HospitalStay& s) {
  Json j = corpus::to_json(s);
  j["note_ids"] = s.note_ids;
  return j;
}

corpus::HospitalStay stay_with_notes(const Json& j) {
  auto s = corpus::stay_from_json(j);
  if (j.contains("note_ids")) s.note_ids = j["note_ids"].get<std::vector<std::string>>();
  return s;
}

std::vector<corpus::Paragraph> read_paragraphs(const fs::path& path) {
  std::vector<corpus::Paragraph> out;
  read_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(corpus::paragraph_from_json(j)); });
  return out;
}

void write_paragraphs(const fs::path& path, const std::vector<corpus::Paragraph>& paragraphs) {
  std::vector<Json> rows;
  rows.reserve(paragraphs.size());
  for (const auto& p : paragraphs) rows.push_back(corpus::to_json(p));
  write_jsonl(path, rows);
}

std::vector<corpus::Paragraph> build_all_paragraphs(const corpus::Corpus& c, const corpus::WindowConfig& window) {
  const auto filter = corpus::SectionFilter::clinical_default();
  std::vector<corpus::Paragraph> out;
  for (const auto& note : c.notes) {
    for (auto& p : corpus::build_paragraphs(note, c.annotations, filter, window)) out.push_back(std::move(p));
  }
  return out;
}

struct LoadedRetriever {
  retriever::RetrieverModel model;
  fs::path checkpoint;
  std::string sha256;
};

LoadedRetriever load_retriever(const PipelineConfig& config, const PreparedData& data) {
  const auto path = retriever_dir(config, data) / kRetrieverCheckpoint;
  if (!fs::exists(path)) {
    throw DataError("retriever checkpoint " + path.string() +
                    " not found for this config and prepared data; run 'train --stage retriever' first");
  }
  const auto ckpt = nn::load_checkpoint(path);
  const auto fp = ckpt.metadata.value("corpus_fingerprint", std::string());
  if (fp != data.fingerprint) {
    throw DataError("retriever checkpoint " + path.string() + " was trained on prepared data fingerprint " + fp +
                    ", not " + data.fingerprint);
  }
  return {retriever::RetrieverModel::from_checkpoint(ckpt), path, sha256_file(path)};
}

struct LoadedPredictor {
  predictor::StayPredictor model;
  predictor::CountDistribution neutral_counts;
  fs::path checkpoint;
  std::string sha256;
};

LoadedPredictor load_predictor(const PipelineConfig& config, const PreparedData& data, const LoadedRetriever& retriever) {
  const auto path = predictor_dir(config, data, retriever.sha256) / kPredictorCheckpoint;
  if (!fs::exists(path)) {
    throw DataError("predictor checkpoint " + path.string() +
                    " not found for this config and retriever; run 'train --stage predictor' first");
  }
  const auto ckpt = nn::load_checkpoint(path);
  if (ckpt.metadata.value("retriever_sha256", std::string()) != retriever.sha256) {
    throw DataError("predictor checkpoint " + path.string() + " was trained against a different retriever checkpoint");
  }
  if (ckpt.metadata.value("corpus_fingerprint", std::string()) != data.fingerprint) {
    throw DataError("predictor checkpoint " + path.string() + " was trained on a different prepared data fingerprint");
  }
  return {predictor::StayPredictor::from_checkpoint(ckpt),
          predictor::CountDistribution::from_json(ckpt.metadata.at("neutral_count_distribution")), path,
          sha256_file(path)};
}

template <std::size_t N>
std::vector<std::string> names(const std::array<std::string, N>& a) {
  return std::vector<std::string>(a.begin(), a.end());
}

}  // namespace

fs::path prepared_dir(const PipelineConfig& config) {
  return config.run_dir("prepare", "prepared", {{"corpus", input_fingerprint(config.input_paths())}});
}

fs::path retriever_dir(const PipelineConfig& config, const PreparedData& data) {
  return config.run_dir("retriever", "retriever", {{"prepared", data.fingerprint}});
}

fs::path predictor_dir(const PipelineConfig& config, const PreparedData& data, const std::string& retriever_sha256) {
  return config.run_dir("predictor", "predictor", {{"prepared", data.fingerprint}, {"retriever", retriever_sha256}});
}

SynthSummary run_synth(const PipelineConfig& config, const Logger& log) {
  const auto dir = config.run_dir("synth", "corpus", Json::object());
  const auto spec = config.synth_spec();
  const auto pools = synth::TemplatePools::load(config.template_dir());
  const auto corpus = synth::generate_corpus(spec, pools);
  synth::write_synth_corpus(corpus, dir);
  write_json(dir / "synth.json", synth::spec_to_json(spec));
  write_run(dir, config, {{"stage", "synth"}});

  SynthSummary s{corpus.corpus.stays.size(), corpus.corpus.notes.size(), corpus.corpus.annotations.size(),
                 corpus.ledger.size(), 0, dir};
  for (const auto& e : corpus.ledger) s.evidence_paragraphs += e.evidence == Evidence::Yes;
  say(log, "synth: " + std::to_string(s.stays) + " stays, " + std::to_string(s.notes) + " notes, " +
               std::to_string(s.annotations) + " annotations, " + std::to_string(s.paragraphs) + " paragraphs (" +
               std::to_string(s.evidence_paragraphs) + " evidence) -> " + dir.string());
  return s;
}

std::vector<corpus::HospitalStay> PreparedData::stays_in(corpus::SplitName s) const {
  const auto& ids = split.stays(s);
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<corpus::HospitalStay> out;
  for (const auto& st : stays) {
    if (wanted.count(st.stay_id)) out.push_back(st);
  }
  return out;
}

std::vector<corpus::Paragraph> PreparedData::paragraphs_in(corpus::SplitName s) const {
  const auto& ids = split.stays(s);
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<corpus::Paragraph> out;
  for (const auto& p : paragraphs) {
    if (wanted.count(p.stay_id)) out.push_back(p);
  }
  return out;
}

PrepareSummary run_prepare(const PipelineConfig& config, const Logger& log) {
  const auto paths = config.input_paths();
  const auto input_fp = input_fingerprint(paths);
  const auto corpus = corpus::load_corpus(paths);

  const auto paragraphs = build_all_paragraphs(corpus, config.window());
  const auto split = corpus::split_by_patient(corpus.stays, config.ratios(), config.seed());
  const std::set<std::string> train_ids(split.train.begin(), split.train.end());
  std::vector<corpus::Paragraph> train;
  for (const auto& p : paragraphs) {
    if (train_ids.count(p.stay_id)) train.push_back(p);
  }
  train = corpus::downsample_no_evidence(train, config.downsample_fraction(), derive_seed(config.seed(), "downsample"));

  const auto dir = prepared_dir(config);
  write_paragraphs(dir / "paragraphs.jsonl", paragraphs);
  write_paragraphs(dir / "train_paragraphs.jsonl", train);
  write_json(dir / "splits.json", corpus::to_json(split));
  std::vector<Json> stays;
  for (const auto& s : corpus.stays) stays.push_back(stay_json(s));
  write_jsonl(dir / "stays.jsonl", stays);

  PrepareSummary summary;
  summary.directory = dir;
  summary.stats = corpus::corpus_stats(corpus, paragraphs, &split);
  write_json(dir / "stats.json", summary.stats.to_json());
  write_text(dir / "stats.txt", summary.stats.to_text());
  summary.fingerprint = prepared_fingerprint(dir);
  write_run(dir, config,
            {{"stage", "prepare"}, {"input_fingerprint", input_fp}, {"fingerprint", summary.fingerprint},
             {"downsample_seed", derive_seed(config.seed(), "downsample")}});
  say(log, "prepare: " + std::to_string(paragraphs.size()) + " paragraphs, " + std::to_string(train.size()) +
               " training paragraphs after down-sampling, splits " + std::to_string(split.train.size()) + "/" +
               std::to_string(split.validation.size()) + "/" + std::to_string(split.test.size()) + " stays -> " +
               dir.string());
  return summary;
}

PreparedData load_prepared(const fs::path& dir) {
  if (!fs::exists(dir / "run.json")) {
    throw DataError("no prepared data in " + dir.string() + " for this config and input; run 'prepare' first");
  }
  PreparedData d;
  d.directory = dir;
  d.paragraphs = read_paragraphs(dir / "paragraphs.jsonl");
  d.train_paragraphs = read_paragraphs(dir / "train_paragraphs.jsonl");
  d.split = corpus::split_from_json(read_json(dir / "splits.json"));
  read_jsonl(dir / "stays.jsonl", [&](const Json& j, std::size_t) { d.stays.push_back(stay_with_notes(j)); });
  d.fingerprint = prepared_fingerprint(dir);
  const auto recorded = read_json(dir / "run.json").value("fingerprint", std::string());
  if (recorded != d.fingerprint) {
    throw DataError("prepared data in " + dir.string() + " was modified after 'prepare' (fingerprint mismatch)");
  }
  return d;
}

PreparedData load_prepared(const PipelineConfig& config) { return load_prepared(prepared_dir(config)); }

TrainSummary run_train_retriever(const PipelineConfig& config, const Logger& log) {
  const auto data = load_prepared(config);
  const auto validation = data.paragraphs_in(corpus::SplitName::Validation);
  std::vector<std::string> texts;
  for (const auto& p : data.train_paragraphs) texts.push_back(p.text);
  const auto enc_config = config.encoder_config();
  auto encoder =
      std::make_shared<retriever::ToyEncoder>(enc_config, retriever::Vocabulary::build(texts, enc_config.min_token_count));
  const auto train_config = config.retriever_config();

  std::vector<Json> epochs;
  auto result = retriever::train_retriever(
      retriever::RetrieverModel(encoder, config.seed()), data.train_paragraphs, validation, train_config,
      [&](const retriever::RetrieverEpoch& e) {
        epochs.push_back(e.to_json());
        say(log, "retriever epoch " + std::to_string(e.epoch) + ": loss " + std::to_string(e.train_loss) +
                     ", validation evidence macro-F1 " + std::to_string(e.validation_evidence_f1));
      });

  Json training = train_config.to_json();
  training["class_weights"] = {{"evidence", result.weights.evidence}, {"sa", result.weights.sa}, {"si", result.weights.si}};
  training["best_epoch"] = result.best_epoch;
  auto ckpt = result.model.to_checkpoint(training);
  ckpt.metadata["corpus_fingerprint"] = data.fingerprint;
  const auto dir = retriever_dir(config, data);
  TrainSummary s;
  s.checkpoint = dir / kRetrieverCheckpoint;
  nn::save_checkpoint(s.checkpoint, ckpt);
  write_jsonl(dir / "train_log.jsonl", epochs);
  s.epochs = result.log.size();
  s.best_epoch = result.best_epoch;
  s.checkpoint_sha256 = sha256_file(s.checkpoint);
  write_run(dir, config,
            {{"stage", "train-retriever"}, {"input_fingerprint", data.fingerprint},
             {"checkpoint_sha256", s.checkpoint_sha256}, {"best_epoch", s.best_epoch}});
  say(log, "retriever: best epoch " + std::to_string(s.best_epoch) + " of " + std::to_string(s.epochs) + " -> " +
               s.checkpoint.string());
  return s;
}

TrainSummary run_train_predictor(const PipelineConfig& config, const Logger& log) {
  const auto data = load_prepared(config);
  const auto loaded_retriever = load_retriever(config, data);
  const auto& retriever = loaded_retriever.model;
  const auto retriever_hash = loaded_retriever.sha256;
  const auto params_before = nn::serialize_checkpoint(retriever.to_checkpoint());

  say(log, "predictor: encoding paragraphs with the frozen retriever");
  const auto train = predictor::encode_stays(retriever, data.stays_in(corpus::SplitName::Train),
                                             data.paragraphs_in(corpus::SplitName::Train));
  const auto validation = predictor::encode_stays(retriever, data.stays_in(corpus::SplitName::Validation),
                                                  data.paragraphs_in(corpus::SplitName::Validation));
  const auto train_config = config.predictor_train_config();
  std::vector<Json> epochs;
  auto result = predictor::train_predictor(
      predictor::StayPredictor(config.predictor_config(retriever.dim()), config.seed()), train, validation,
      train_config, [&](const predictor::PredictorEpoch& e) {
        Json j = e.to_json();
        j["retriever_sha256"] = retriever_hash;
        epochs.push_back(j);
        say(log, "predictor epoch " + std::to_string(e.epoch) + ": loss " + std::to_string(e.train_loss) +
                     ", validation SA/SI macro-F1 " + std::to_string(e.validation_sa_f1) + "/" +
                     std::to_string(e.validation_si_f1));
      });
  for (const auto& w : result.warnings) say(log, "warning: " + w);

  if (nn::serialize_checkpoint(retriever.to_checkpoint()) != params_before ||
      sha256_file(loaded_retriever.checkpoint) != retriever_hash) {
    throw Error("retriever parameters changed during predictor training");
  }

  Json meta;
  meta["training"] = train_config.to_json();
  meta["best_epoch"] = result.best_epoch;
  meta["retriever_sha256"] = retriever_hash;
  meta["corpus_fingerprint"] = data.fingerprint;
  meta["neutral_count_distribution"] = result.neutral_counts.to_json();
  meta["warnings"] = result.warnings;
  const auto dir = predictor_dir(config, data, retriever_hash);
  TrainSummary s;
  s.checkpoint = dir / kPredictorCheckpoint;
  nn::save_checkpoint(s.checkpoint, result.model.to_checkpoint(meta));
  write_jsonl(dir / "train_log.jsonl", epochs);
  s.epochs = result.log.size();
  s.best_epoch = result.best_epoch;
  s.checkpoint_sha256 = sha256_file(s.checkpoint);
  s.retriever_sha256 = retriever_hash;
  s.warnings = result.warnings;
  write_run(dir, config,
            {{"stage", "train-predictor"}, {"input_fingerprint", data.fingerprint},
             {"retriever_sha256", retriever_hash}, {"retriever_sha256_after", sha256_file(loaded_retriever.checkpoint)},
             {"checkpoint_sha256", s.checkpoint_sha256}, {"best_epoch", s.best_epoch}});
  say(log, "predictor: best epoch " + std::to_string(s.best_epoch) + " of " + std::to_string(s.epochs) +
               ", retriever " + retriever_hash.substr(0, 12) + " unchanged -> " + s.checkpoint.string());
  return s;
}

EvaluateSummary run_evaluate(const PipelineConfig& config, corpus::SplitName split, bool arithmetic_check,
                             const Logger& log) {
  const auto data = load_prepared(config);
  const auto loaded_retriever = load_retriever(config, data);
  const auto& retriever = loaded_retriever.model;
  const auto loaded = load_predictor(config, data, loaded_retriever);
  const auto stays = predictor::encode_stays(retriever, data.stays_in(split), data.paragraphs_in(split));

  std::vector<Json> paragraph_rows, stay_rows;
  metrics::TaskData evidence{"evidence", names(evidence_class_names()), {}, {}};
  metrics::TaskData para_sa{"paragraph-sa", names(sa_class_names()), {}, {}};
  metrics::TaskData para_si{"paragraph-si", names(si_class_names()), {}, {}};
  metrics::TaskData stay_sa{"stay-sa", names(sa_class_names()), {}, {}};
  metrics::TaskData stay_si{"stay-si", names(si_class_names()), {}, {}};
  for (const auto& s : stays) {
    for (std::size_t i = 0; i < s.paragraphs.size(); ++i) {
      const auto& p = s.paragraphs[i];
      const auto& sc = s.scores[i];
      paragraph_rows.push_back(retriever::paragraph_prediction_json(p.paragraph_id, sc));
      evidence.gold.push_back(index_of(p.evidence));
      evidence.predicted.push_back(index_of(sc.evidence_label()));
      para_sa.gold.push_back(index_of(p.sa_label));
      para_sa.predicted.push_back(index_of(sc.sa_label()));
      para_si.gold.push_back(index_of(p.si_label));
      para_si.predicted.push_back(index_of(sc.si_label()));
    }
    auto rng = predictor::stay_rng(config.seed(), s.stay.stay_id);
    const auto record = predictor::predict_from_paragraphs(loaded.model, s, loaded.neutral_counts, rng);
    stay_rows.push_back(record.to_json());
    stay_sa.gold.push_back(index_of(s.stay.sa_label));
    stay_sa.predicted.push_back(index_of(record.prediction.sa_label()));
    stay_si.gold.push_back(index_of(s.stay.si_label));
    stay_si.predicted.push_back(index_of(record.prediction.si_label()));
  }

  EvaluateSummary out;
  out.report = metrics::evaluation_report({evidence, para_sa, para_si, stay_sa, stay_si});
  if (arithmetic_check) out.report.arithmetic = metrics::published_arithmetic_check();
  out.directory = config.run_dir("evaluate", "eval-" + std::string(corpus::to_string(split)),
                                 {{"prepared", data.fingerprint},
                                  {"retriever", loaded_retriever.sha256},
                                  {"predictor", loaded.sha256},
                                  {"arithmetic_check", arithmetic_check}});
  write_jsonl(out.directory / "paragraph_predictions.jsonl", paragraph_rows);
  write_jsonl(out.directory / "stay_predictions.jsonl", stay_rows);
  write_json(out.directory / "report.json", out.report.to_json());
  write_text(out.directory / "report.txt", out.report.to_text());
  write_run(out.directory, config,
            {{"stage", "evaluate"}, {"split", corpus::to_string(split)}, {"input_fingerprint", data.fingerprint},
             {"retriever_sha256", loaded_retriever.sha256}, {"predictor_sha256", loaded.sha256}});
  say(log, "evaluate: " + std::to_string(stays.size()) + " stays of split " + std::string(corpus::to_string(split)) +
               " -> " + out.directory.string());
  return out;
}

fs::path run_predict(const PipelineConfig& config, const Logger& log) {
  const auto data = load_prepared(config);
  const auto loaded_retriever = load_retriever(config, data);
  const auto& retriever = loaded_retriever.model;
  const auto loaded = load_predictor(config, data, loaded_retriever);
  const auto paths = config.input_paths();
  const auto input_fp = input_fingerprint(paths);
  const auto corpus = corpus::load_corpus(paths);
  const auto paragraphs = build_all_paragraphs(corpus, config.window());
  const auto stays = predictor::encode_stays(retriever, corpus.stays, paragraphs);

  std::vector<Json> paragraph_rows, stay_rows;
  for (const auto& s : stays) {
    for (std::size_t i = 0; i < s.paragraphs.size(); ++i) {
      paragraph_rows.push_back(retriever::paragraph_prediction_json(s.paragraphs[i].paragraph_id, s.scores[i]));
    }
    auto rng = predictor::stay_rng(config.seed(), s.stay.stay_id);
    stay_rows.push_back(predictor::predict_from_paragraphs(loaded.model, s, loaded.neutral_counts, rng).to_json());
  }
  const auto dir = config.run_dir("predict", "predict",
                                  {{"corpus", input_fp}, {"retriever", loaded_retriever.sha256}, {"predictor", loaded.sha256}});
  write_jsonl(dir / "paragraph_predictions.jsonl", paragraph_rows);
  write_jsonl(dir / "stay_predictions.jsonl", stay_rows);
  write_run(dir, config,
            {{"stage", "predict"}, {"input_fingerprint", input_fp}, {"retriever_sha256", loaded_retriever.sha256},
             {"predictor_sha256", loaded.sha256}});
  say(log, "predict: " + std::to_string(stays.size()) + " stays -> " + dir.string());
  return dir;
}

corpus::StatsReport run_stats(const PipelineConfig& config) {
  const auto corpus = corpus::load_corpus(config.input_paths());
  const auto dir = prepared_dir(config);
  if (fs::exists(dir / "run.json")) {
    const auto data = load_prepared(dir);
    return corpus::corpus_stats(corpus, data.paragraphs, &data.split);
  }
  return corpus::corpus_stats(corpus, build_all_paragraphs(corpus, config.window()));
}

}  // namespace scaner::pipeline
