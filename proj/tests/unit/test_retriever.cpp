#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "finite_difference.hpp"
#include "scaner/common/error.hpp"
#include "scaner/corpus/split.hpp"
#include "scaner/retriever/model.hpp"
#include "scaner/synth/generator.hpp"

using namespace scaner;
using namespace scaner::retriever;

namespace {

const std::vector<std::string> kTexts{
    "Patient tried to hang himself with a belt.",
    "Vital signs stable overnight.",
    "She denies any thoughts of harming herself.",
    "Follow up with primary care in two weeks.",
};

std::shared_ptr<const ToyEncoder> small_encoder(std::size_t dim) {
  return std::make_shared<ToyEncoder>(ToyEncoderConfig{dim, 512, 1}, Vocabulary::build(kTexts));
}

// Weighted negative log-softmax written out directly.
double oracle_nll(const Eigen::RowVectorXd& z, std::size_t gold, double w) {
  double denom = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) denom += std::exp(z(i));
  return -w * std::log(std::exp(z(static_cast<Eigen::Index>(gold))) / denom);
}

Eigen::RowVectorXd random_row(Rng& rng, int n, double scale) {
  Eigen::RowVectorXd r(n);
  for (int i = 0; i < n; ++i) r(i) = rng.normal(0.0, scale);
  return r;
}

struct SynthSplit {
  std::vector<corpus::Paragraph> train, validation, test;
  std::vector<corpus::HospitalStay> stays;
};

SynthSplit synth_split(std::size_t n_stays, std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.n_stays = n_stays;
  spec.seed = seed;
  const auto out = synth::generate_corpus(spec, synth::TemplatePools::load(synth::default_template_dir()));
  const auto filter = corpus::SectionFilter::clinical_default();
  const auto split = corpus::split_by_patient(out.corpus.stays, {}, seed);
  const std::set<std::string> tr(split.train.begin(), split.train.end());
  const std::set<std::string> va(split.validation.begin(), split.validation.end());
  SynthSplit s;
  s.stays = out.corpus.stays;
  for (const auto& note : out.corpus.notes) {
    for (auto& p : corpus::build_paragraphs(note, out.corpus.annotations, filter, spec.window)) {
      (tr.count(p.stay_id) ? s.train : va.count(p.stay_id) ? s.validation : s.test).push_back(p);
    }
  }
  return s;
}

RetrieverTrainConfig fast_config() {
  RetrieverTrainConfig c;
  c.learning_rate = 1e-2;
  c.warmup_steps = 20;
  c.max_epochs = 15;
  c.patience = 15;
  return c;
}

std::shared_ptr<const ToyEncoder> encoder_for(const std::vector<corpus::Paragraph>& train, std::size_t dim) {
  std::vector<std::string> texts;
  for (const auto& p : train) texts.push_back(p.text);
  return std::make_shared<ToyEncoder>(ToyEncoderConfig{dim, 512, 1}, Vocabulary::build(texts));
}

}  // namespace

TEST_CASE("tokenizer and vocabulary") {
  CHECK(tokenize("He took 30 Tylenol-PM, then called 911.") ==
        std::vector<std::string>{"he", "took", "30", "tylenol", "pm", "then", "called", "911"});
  const auto v = Vocabulary::build({"a b b c", "b c"});
  CHECK(v.size() == 4);
  CHECK(v.encode("b c a", 10) == std::vector<int>{1, 2, 3});
  CHECK(v.encode("zebra b", 10) == std::vector<int>{Vocabulary::kUnknown, 1});
  CHECK(v.encode("a b c a b c", 4).size() == 4);
  CHECK(Vocabulary::from_json(v.to_json()).encode("c b a", 10) == v.encode("c b a", 10));
}

TEST_CASE("class weights: hand-computed evidence weights") {
  const auto w = compute_class_weights({9880, 30133}, 2.5);
  CHECK(w[0] == doctest::Approx(std::log(2.5 * 40013.0 / 9880.0)).epsilon(1e-12));
  CHECK(w[0] == doctest::Approx(2.315).epsilon(1e-3));
  CHECK(w[1] == doctest::Approx(1.200).epsilon(1e-3));
}

TEST_CASE("class weights: clamp boundary and errors") {
  CHECK(compute_class_weights({17}, std::exp(1.0))[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(compute_class_weights({1, 1000}, 2.5)[1] == 1.0);
  CHECK_THROWS_AS(compute_class_weights({5, 0}, 2.5), DataError);
  CHECK_THROWS_AS(compute_class_weights({5, 5}, 0.0), ConfigError);
}

TEST_CASE("class weights never drop below one and do not grow with the count") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto total = static_cast<std::size_t>(rng.uniform_int(2, 100000));
    const double gamma = 0.1 + 5.0 * rng.uniform();
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < total; n += 1 + total / 37) {
      const double w = compute_class_weights({n, total - n}, gamma)[0];
      CHECK(w >= 1.0);
      CHECK(w <= previous);
      previous = w;
    }
  }
}

TEST_CASE("multitask loss decomposes into the three task losses") {
  Rng rng(17);
  ClassWeights weights{{2.3, 1.2}, {1.1, 3.0, 1.0}, {1.7, 2.2, 1.0}};
  for (int trial = 0; trial < 200; ++trial) {
    const auto batch = static_cast<std::size_t>(rng.uniform_int(1, 8));
    std::vector<TaskLogits> logits;
    std::vector<TaskGold> gold;
    double le = 0, ls = 0, li = 0;
    for (std::size_t i = 0; i < batch; ++i) {
      logits.push_back({random_row(rng, 2, 3.0), random_row(rng, 3, 3.0), random_row(rng, 3, 3.0)});
      gold.push_back({static_cast<std::size_t>(rng.uniform_int(0, 1)), static_cast<std::size_t>(rng.uniform_int(0, 2)),
                      static_cast<std::size_t>(rng.uniform_int(0, 2))});
      le += oracle_nll(logits.back().evidence, gold.back().evidence, weights.evidence[gold.back().evidence]);
      ls += oracle_nll(logits.back().sa, gold.back().sa, weights.sa[gold.back().sa]);
      li += oracle_nll(logits.back().si, gold.back().si, weights.si[gold.back().si]);
    }
    le /= batch;
    ls /= batch;
    li /= batch;
    const LossConfig config{3.0 * rng.uniform(), 3.0 * rng.uniform()};
    const double total = multitask_loss(logits, gold, weights, config);
    CHECK(std::abs(total - (le + config.alpha * ls + config.beta * li)) <= 1e-9);
    CHECK(total >= 0.0);
    CHECK(multitask_loss(logits, gold, weights, {0.0, 0.0}) == doctest::Approx(le).epsilon(1e-12));

    // The per-example graph terms sum to the same batch loss.
    double graph_total = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      nn::Graph g;
      HeadVars h{g.constant(Eigen::MatrixXd::Zero(1, 1)), g.constant(logits[i].evidence), g.constant(logits[i].sa),
                 g.constant(logits[i].si)};
      graph_total += g.value(example_loss(g, h, gold[i], weights, config, batch))(0, 0);
    }
    CHECK(std::abs(graph_total - total) <= 1e-9);
  }
}

TEST_CASE("multitask loss special values") {
  ClassWeights unit;
  Eigen::RowVectorXd two(2), three(3);
  two << 0.0, 0.0;
  three << 0.0, 0.0, 0.0;
  const auto l = task_losses({{two, three, three}}, {{0, 0, 0}}, unit);
  CHECK(l.evidence == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  for (double margin : {10.0, 40.0, 200.0}) {
    Eigen::RowVectorXd e(2), s(3);
    e << margin, 0.0;
    s << margin, 0.0, 0.0;
    const double total = multitask_loss({{e, s, s}}, {{0, 0, 0}}, unit, {});
    CHECK(total <= 3.7 * 2.0 * std::exp(-margin) + 1e-300);
  }
  CHECK_THROWS_AS((LossConfig{-1.0, 0.0}).validate(), ConfigError);
}

TEST_CASE("retriever gradients match central finite differences") {
  const RetrieverModel base(small_encoder(8), 5);
  RetrieverModel model = base;
  const ClassWeights weights{{2.0, 1.0}, {1.5, 2.5, 1.0}, {1.2, 1.8, 1.0}};
  const LossConfig config{1.1, 1.5};
  const std::vector<std::pair<std::string, TaskGold>> batch{
      {kTexts[0], {0, 0, 2}}, {kTexts[1], {1, 2, 2}}, {kTexts[2], {0, 2, 1}}};
  auto loss_of = [&](const nn::ParameterStore& params, nn::Gradients* grads) {
    RetrieverModel m = model;
    m.params() = params;
    double total = 0.0;
    for (const auto& [text, gold] : batch) {
      nn::Graph g(&m.params());
      const auto l = example_loss(g, m.forward(g, text), gold, weights, config, batch.size());
      total += g.value(l)(0, 0);
      if (grads) {
        g.backward(l);
        g.accumulate(*grads);
      }
    }
    return total;
  };
  auto grads = model.params().zeros_like();
  loss_of(model.params(), &grads);
  const auto r = testing::check_gradients(model.params(), grads,
                                          [&](const nn::ParameterStore& p) { return loss_of(p, nullptr); });
  CAPTURE(r.worst_param);
  CHECK(r.max_rel_error < 1e-4);
  CHECK(model.params() == base.params());
}

TEST_CASE("classify_paragraph returns three simplex vectors and is deterministic") {
  const RetrieverModel model(small_encoder(12), 2);
  for (const auto& t : kTexts) {
    const auto a = classify_paragraph(model, t);
    const auto b = classify_paragraph(model, t);
    CHECK(a.evidence == b.evidence);
    CHECK(a.sa == b.sa);
    CHECK(a.si == b.si);
    CHECK(a.evidence[0] + a.evidence[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(a.sa[0] + a.sa[1] + a.sa[2] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(a.si[0] + a.si[1] + a.si[2] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(model.encode(t).size() == 12);
  }
  CHECK_THROWS_AS(classify_paragraph(model, ""), DataError);
}

TEST_CASE("checkpoint round-trip keeps outputs and class orders") {
  const RetrieverModel model(small_encoder(8), 9);
  const auto bytes = nn::serialize_checkpoint(model.to_checkpoint({{"note", "x"}}));
  const auto back = RetrieverModel::from_checkpoint(nn::deserialize_checkpoint(bytes));
  CHECK(back.classify(kTexts[0]).sa == model.classify(kTexts[0]).sa);
  CHECK(nn::serialize_checkpoint(back.to_checkpoint({{"note", "x"}})) == bytes);

  auto tampered = model.to_checkpoint();
  tampered.metadata["class_orders"]["sa"] = {"neutral", "neg_unsure", "positive"};
  CHECK_THROWS_AS(RetrieverModel::from_checkpoint(tampered), DataError);
  auto wrong_kind = model.to_checkpoint();
  wrong_kind.kind = "predictor";
  CHECK_THROWS_AS(RetrieverModel::from_checkpoint(wrong_kind), DataError);
}

TEST_CASE("retrieve_evidence: ordering, empty results and errors") {
  RetrieverModel model(small_encoder(8), 4);
  corpus::HospitalStay stay;
  stay.stay_id = "S1";
  CHECK_THROWS_AS(retrieve_evidence(model, stay, {}), DataError);

  stay.note_ids = {"S1-N02", "S1-N01"};
  std::vector<corpus::Paragraph> paragraphs;
  for (const char* id : {"S1-N01/p0001", "S1-N01/p0000", "S1-N02/p0000", "S2-N01/p0000"}) {
    corpus::Paragraph p;
    p.paragraph_id = id;
    p.note_id = std::string(id).substr(0, 6);
    p.stay_id = p.note_id.substr(0, 2);
    p.text = kTexts[paragraphs.size()];
    paragraphs.push_back(p);
  }
  auto& bias = model.params().value(model.params().index("head.evidence.b"));
  bias << 100.0, -100.0;
  const auto all = retrieve_evidence(model, stay, paragraphs);
  REQUIRE(all.size() == 3);
  CHECK(all[0].paragraph.paragraph_id == "S1-N02/p0000");
  CHECK(all[1].paragraph.paragraph_id == "S1-N01/p0000");
  CHECK(all[2].paragraph.paragraph_id == "S1-N01/p0001");
  CHECK(all[0].vector.size() == 8);
  const auto again = retrieve_evidence(model, stay, paragraphs);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(again[i].paragraph.paragraph_id == all[i].paragraph.paragraph_id);

  bias << -100.0, 100.0;
  CHECK(retrieve_evidence(model, stay, paragraphs).empty());
}

TEST_CASE("training on a separable synthetic corpus") {
  const auto data = synth_split(160, 21);
  const auto train = corpus::downsample_no_evidence(data.train, 0.1, 21);
  const auto config = fast_config();
  const auto encoder = encoder_for(train, 16);
  const auto a = train_retriever(RetrieverModel(encoder, 1), train, data.validation, config);
  const auto train_f1 = paragraph_macro_f1(train, classify_all(a.model, train));
  CHECK(train_f1.evidence >= 0.99);
  CHECK(a.best_epoch >= 1);
  CHECK(a.log.size() >= a.best_epoch);

  SUBCASE("same seed gives an identical trajectory") {
    const auto b = train_retriever(RetrieverModel(encoder, 1), train, data.validation, config);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
      CHECK(a.log[i].train_loss == b.log[i].train_loss);
      CHECK(a.log[i].validation_evidence_f1 == b.log[i].validation_evidence_f1);
    }
    CHECK(a.model.params() == b.model.params());
  }

  SUBCASE("a planted positive SA sentence is retrieved as positive SA") {
    const auto pools = synth::TemplatePools::load(synth::default_template_dir());
    std::vector<const corpus::Paragraph*> hosts;
    for (const auto& p : data.test) {
      if (p.evidence == Evidence::No && hosts.size() < 5) hosts.push_back(&p);
    }
    REQUIRE(hosts.size() == 5);
    std::size_t hits = 0, total = 0;
    for (const auto& t : pools.sa_positive) {
      // Only templates the generator planted in the training split.
      const auto probe = synth::render(t.text, synth::Persona{false}, "aspirin");
      std::string key;
      for (std::size_t pos = 0; pos < t.text.size();) {
        const auto open = std::min(t.text.find('{', pos), t.text.size());
        if (open - pos > key.size()) key = t.text.substr(pos, open - pos);
        pos = open < t.text.size() ? t.text.find('}', open) + 1 : open;
      }
      const bool seen = std::any_of(train.begin(), train.end(), [&](const corpus::Paragraph& p) {
        return merge_sa_label(p.sa4) == SaLabel::Positive && p.text.find(key) != std::string::npos;
      });
      if (!seen) continue;
      for (const auto* host : hosts) {
        const auto s = a.model.classify(host->text + " " + probe);
        hits += s.evidence_label() == Evidence::Yes && s.sa_label() == SaLabel::Positive;
        ++total;
      }
    }
    CHECK(total >= 25);
    CHECK(hits == total);
  }

  SUBCASE("alpha = beta = 0 leaves the auxiliary heads untouched") {
    auto ablation = config;
    ablation.loss = {0.0, 0.0};
    const RetrieverModel init(encoder, 1);
    const auto r = train_retriever(init, train, data.validation, ablation);
    for (const char* name : {"head.sa.w", "head.sa.b", "head.si.w", "head.si.b"}) {
      CHECK(r.model.params().value(r.model.params().index(name)) == init.params().value(init.params().index(name)));
    }
    CHECK(paragraph_macro_f1(train, classify_all(r.model, train)).evidence >= 0.99);
  }
}

TEST_CASE("training input errors") {
  const RetrieverModel model(small_encoder(8), 1);
  corpus::Paragraph p;
  p.paragraph_id = "x";
  p.text = kTexts[0];
  CHECK_THROWS_AS(train_retriever(model, {}, {p}, fast_config()), DataError);
  CHECK_THROWS_AS(train_retriever(model, {p}, {}, fast_config()), DataError);
}
