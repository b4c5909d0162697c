#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "scaner/common/error.hpp"
#include "scaner/common/hash.hpp"
#include "scaner/common/jsonl.hpp"
#include "scaner/pipeline/config.hpp"
#include "scaner/synth/generator.hpp"

namespace fs = std::filesystem;
using namespace scaner;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run scaner_cli(const std::string& args) {
  static int counter = 0;
  const auto base = fs::temp_directory_path() / ("scaner-cli-" + std::to_string(::getpid()));
  fs::create_directories(base);
  const auto out = base / ("out" + std::to_string(counter) + ".txt");
  const auto err = base / ("err" + std::to_string(counter++) + ".txt");
  const std::string cmd = std::string(SCANER_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("scaner-cli-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::map<std::string, std::string> tree_hashes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = sha256_file(e.path());
  }
  return out;
}

// Value of a "key value" line in command output.
std::string field(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " ", 0) == 0) return line.substr(key.size() + 1);
  }
  return "";
}

std::vector<fs::path> dirs_with_prefix(const fs::path& root, const std::string& prefix) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && e.path().filename().string().rfind(prefix, 0) == 0) out.push_back(e.path());
  }
  return out;
}

const std::string kSmall =
    " --synth_n_stays 40 --encoder_dim 12 --retriever_max_epochs 2 --retriever_warmup_steps 10"
    " --retriever_learning_rate 0.003 --predictor_epochs 2 --predictor_warmup_steps 10";

}  // namespace

TEST_CASE("config rejects unknown keys and mistyped values") {
  pipeline::PipelineConfig c;
  CHECK_THROWS_AS(c.set("no_such_key", 1), ConfigError);
  CHECK_THROWS_AS(c.set_from_text("window_size", "twenty"), ConfigError);
  CHECK_THROWS_AS(pipeline::PipelineConfig::from_json(Json{{"windowsize", 20}}), ConfigError);
  const auto before = c.hash();
  c.set_from_text("window_size", "12");
  c.set_from_text("out_dir", "somewhere");
  CHECK(c.get("window_size") == 12);
  CHECK(c.out_dir() == fs::path("somewhere"));
  CHECK(c.hash() != before);
  CHECK(c.window().window == 12);
  c.set_from_text("overlap", "12");
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("cli: unknown flags and bad stage values fail") {
  CHECK(scaner_cli("prepare --no-such-flag 3").status != 0);
  CHECK(scaner_cli("train --stage encoder").status != 0);
  CHECK(scaner_cli("evaluate --split holdout").status != 0);
  CHECK(scaner_cli("prepare --window_size x").status != 0);
}

TEST_CASE("cli: prepare is deterministic and stats match the generator ledger") {
  const auto dir = fresh_dir("prepare");
  const auto common = " --out " + dir.string() + " --seed 5 --synth_n_stays 40";
  const auto synth = scaner_cli("synth" + common);
  REQUIRE(synth.status == 0);
  const fs::path corpus_dir = field(synth.out, "directory");
  const auto prepared = scaner_cli("prepare" + common);
  REQUIRE(prepared.status == 0);
  const fs::path prepared_dir = field(prepared.out, "directory");
  CHECK(prepared_dir.parent_path() == dir);
  CHECK(prepared_dir.filename().string().rfind("prepared-", 0) == 0);
  const auto first = tree_hashes(prepared_dir);
  CHECK(first.count("paragraphs.jsonl") == 1);
  CHECK(first.count("run.json") == 1);
  const auto again = scaner_cli("prepare" + common);
  REQUIRE(again.status == 0);
  CHECK(field(again.out, "directory") == prepared_dir.string());
  CHECK(tree_hashes(prepared_dir) == first);

  // Another window setting gets its own directory; the first is untouched.
  const auto other = scaner_cli("prepare --window_size 10" + common);
  REQUIRE(other.status == 0);
  CHECK(field(other.out, "directory") != prepared_dir.string());
  CHECK(dirs_with_prefix(dir, "prepared-").size() == 2);
  CHECK(tree_hashes(prepared_dir) == first);

  const auto stats = scaner_cli("stats --json" + common);
  REQUIRE(stats.status == 0);
  const auto j = Json::parse(stats.out);
  std::size_t yes = 0, no = 0;
  for (const auto& e : synth::read_ledger(corpus_dir / "ledger.jsonl")) (e.evidence == Evidence::Yes ? yes : no) += 1;
  std::size_t stats_yes = 0, stats_no = 0;
  for (const auto& [split, counts] : j.at("paragraphs").items()) {
    stats_yes += counts.at("evidence").at("yes").get<std::size_t>();
    stats_no += counts.at("evidence").at("no").get<std::size_t>();
  }
  CHECK(stats_yes == yes);
  CHECK(stats_no == no);
  CHECK(j.at("stays") == 40);
}

TEST_CASE("cli: annotation referencing a missing note") {
  const auto dir = fresh_dir("dangling");
  const auto common = " --out " + dir.string() + " --synth_n_stays 10";
  const auto synth = scaner_cli("synth" + common);
  REQUIRE(synth.status == 0);
  {
    std::ofstream out(fs::path(field(synth.out, "directory")) / "annotations.jsonl", std::ios::app);
    out << R"({"note_id":"S77777-N09","start":0,"end":5,"event":"SI","label":"positive"})" << "\n";
  }
  const auto r = scaner_cli("prepare" + common);
  CHECK(r.status != 0);
  CHECK(r.err.find("S77777-N09") != std::string::npos);
}

TEST_CASE("cli: predictor stage needs a retriever checkpoint") {
  const auto dir = fresh_dir("no-retriever");
  const auto common = " --out " + dir.string() + " --synth_n_stays 20";
  REQUIRE(scaner_cli("synth" + common).status == 0);
  REQUIRE(scaner_cli("prepare" + common).status == 0);
  const auto r = scaner_cli("train --stage predictor" + common);
  CHECK(r.status != 0);
  CHECK(r.err.find("retriever") != std::string::npos);
}

TEST_CASE("cli: full small run, frozen retriever audit and stale-artifact detection") {
  const auto dir = fresh_dir("full");
  const auto common = " --out " + dir.string() + kSmall;
  REQUIRE(scaner_cli("synth" + common).status == 0);
  const auto prepared = scaner_cli("prepare" + common);
  REQUIRE(prepared.status == 0);
  const auto retriever = scaner_cli("train --stage retriever" + common);
  REQUIRE(retriever.status == 0);
  const fs::path retriever_ckpt = field(retriever.out, "checkpoint");
  const auto retriever_hash = sha256_file(retriever_ckpt);
  CHECK(field(retriever.out, "checkpoint_sha256") == retriever_hash);
  const auto predictor = scaner_cli("train --stage predictor" + common);
  REQUIRE(predictor.status == 0);
  CHECK(field(predictor.out, "retriever_sha256") == retriever_hash);
  CHECK(sha256_file(retriever_ckpt) == retriever_hash);
  const fs::path predictor_ckpt = field(predictor.out, "checkpoint");
  CHECK(slurp(predictor_ckpt.parent_path() / "train_log.jsonl").find(retriever_hash) != std::string::npos);
  CHECK(Json::parse(slurp(predictor_ckpt.parent_path() / "run.json")).at("config").at("predictor_epochs") == 2);

  const auto eval = scaner_cli("evaluate --split test" + common);
  REQUIRE(eval.status == 0);
  const fs::path eval_dir = field(eval.out, "directory");
  CHECK(eval_dir.filename().string().rfind("eval-test-", 0) == 0);
  const auto report = Json::parse(slurp(eval_dir / "report.json"));
  CHECK(report.at("tasks").size() == 5);
  const auto text = slurp(eval_dir / "report.txt");
  CHECK(text.find("Precision") < text.find("Recall"));
  CHECK(text.find("Recall") < text.find("F1-score"));
  read_jsonl(eval_dir / "stay_predictions.jsonl",
             [](const Json& line, std::size_t) { CHECK(!line.at("evidence_paragraph_ids").empty()); });
  const auto eval_files = tree_hashes(eval_dir);
  REQUIRE(scaner_cli("evaluate --split test" + common).status == 0);
  CHECK(tree_hashes(eval_dir) == eval_files);

  const auto checked = scaner_cli("evaluate --split validation --paper-arithmetic-check" + common);
  CHECK(checked.status == 2);
  CHECK(checked.out.find("published-arithmetic: FAIL") != std::string::npos);
  CHECK(fs::exists(fs::path(field(checked.out, "directory")) / "report.json"));

  const auto predict = scaner_cli("predict" + common);
  CHECK(predict.status == 0);
  CHECK(fs::exists(fs::path(predict.out.substr(0, predict.out.find('\n')))));

  // Prepared data for other settings has no models trained on it.
  REQUIRE(scaner_cli("prepare --downsample_fraction 0.5" + common).status == 0);
  const auto missing = scaner_cli("evaluate --downsample_fraction 0.5" + common);
  CHECK(missing.status != 0);
  CHECK(missing.err.find("retriever checkpoint") != std::string::npos);
  CHECK(scaner_cli("train --stage predictor --downsample_fraction 0.5" + common).status != 0);

  // A changed predictor setting finds the same retriever but no predictor.
  const auto other_predictor = scaner_cli("evaluate --irrelevant_prob 0.1" + common);
  CHECK(other_predictor.status != 0);
  CHECK(other_predictor.err.find("predictor checkpoint") != std::string::npos);

  // Editing prepared files after the fact is detected.
  {
    std::ofstream out(fs::path(field(prepared.out, "directory")) / "splits.json", std::ios::app);
    out << "\n";
  }
  const auto tampered = scaner_cli("evaluate" + common);
  CHECK(tampered.status != 0);
  CHECK(tampered.err.find("fingerprint") != std::string::npos);
}
