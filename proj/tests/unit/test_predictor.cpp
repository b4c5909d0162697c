#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "finite_difference.hpp"
#include "scaner/common/error.hpp"
#include "scaner/common/hash.hpp"
#include "scaner/corpus/split.hpp"
#include "scaner/predictor/pipeline.hpp"
#include "scaner/synth/generator.hpp"

using namespace scaner;
using namespace scaner::predictor;

namespace {

nn::Matrix random_vectors(Rng& rng, std::size_t n, std::size_t d) {
  nn::Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Upper 1% points of the chi-square distribution.
double chi2_critical_001(std::size_t df) {
  static const double table[] = {0.0, 6.635, 9.210, 11.345, 13.277, 15.086, 16.812};
  return table[df];
}

struct Trained {
  synth::SynthCorpus synth;
  std::vector<StayParagraphs> train, validation, test;
  retriever::RetrieverModel retriever;
  std::string retriever_bytes;
};

// One small retriever shared by the end-to-end cases.
const Trained& trained() {
  static const Trained t = [] {
    synth::SynthSpec spec;
    spec.n_stays = 160;
    spec.seed = 8;
    auto out = synth::generate_corpus(spec, synth::TemplatePools::load(synth::default_template_dir()));
    const auto filter = corpus::SectionFilter::clinical_default();
    std::vector<corpus::Paragraph> paragraphs;
    for (const auto& note : out.corpus.notes) {
      for (auto& p : corpus::build_paragraphs(note, out.corpus.annotations, filter, spec.window)) paragraphs.push_back(p);
    }
    const auto split = corpus::split_by_patient(out.corpus.stays, {}, spec.seed);
    auto pick = [&](const std::vector<std::string>& ids) {
      const std::set<std::string> keep(ids.begin(), ids.end());
      std::vector<corpus::HospitalStay> stays;
      std::vector<corpus::Paragraph> ps;
      for (const auto& s : out.corpus.stays) if (keep.count(s.stay_id)) stays.push_back(s);
      for (const auto& p : paragraphs) if (keep.count(p.stay_id)) ps.push_back(p);
      return std::pair{stays, ps};
    };
    const auto [train_stays, train_ps] = pick(split.train);
    const auto [val_stays, val_ps] = pick(split.validation);
    const auto [test_stays, test_ps] = pick(split.test);

    std::vector<std::string> texts;
    for (const auto& p : train_ps) texts.push_back(p.text);
    auto encoder = std::make_shared<retriever::ToyEncoder>(retriever::ToyEncoderConfig{18, 512, 1},
                                                           retriever::Vocabulary::build(texts));
    retriever::RetrieverTrainConfig rc;
    rc.learning_rate = 1e-2;
    rc.warmup_steps = 20;
    rc.max_epochs = 15;
    rc.patience = 15;
    auto model = retriever::train_retriever(retriever::RetrieverModel(encoder, 1),
                                            corpus::downsample_no_evidence(train_ps, 0.1, 8), val_ps, rc)
                     .model;
    Trained r{std::move(out), {}, {}, {}, model, ""};
    r.train = encode_stays(model, train_stays, train_ps);
    r.validation = encode_stays(model, val_stays, val_ps);
    r.test = encode_stays(model, test_stays, test_ps);
    r.retriever_bytes = nn::serialize_checkpoint(model.to_checkpoint());
    return r;
  }();
  return t;
}

PredictorTrainConfig fast_predictor_config(std::uint64_t seed) {
  PredictorTrainConfig c;
  c.learning_rate = 3e-3;
  c.warmup_steps = 20;
  c.epochs = 15;
  c.seed = seed;
  return c;
}

PredictorConfig small_config(std::size_t dim) {
  PredictorConfig c;
  c.dim = dim;
  return c;
}

}  // namespace

TEST_CASE("neutral count distribution: histogram arithmetic") {
  const auto d = build_neutral_count_distribution({2, 2, 4});
  REQUIRE(d.masses().size() == 2);
  CHECK(d.probability(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(d.probability(4) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(d.probability(3) == 0.0);
  const auto point = build_neutral_count_distribution({7});
  CHECK(point.probability(7) == 1.0);
  CHECK(point.mean() == 7.0);
  CHECK(build_neutral_count_distribution({0, 3, 0}).probability(3) == 1.0);
  CHECK_THROWS_AS(build_neutral_count_distribution({}), DataError);
  CHECK_THROWS_AS(build_neutral_count_distribution({0, 0}), DataError);
  CHECK(CountDistribution::from_json(d.to_json()) == d);
}

TEST_CASE("neutral count distribution mean equals the ledger mean") {
  synth::SynthSpec spec;
  spec.n_stays = 200;
  spec.seed = 4;
  const auto out = synth::generate_corpus(spec, synth::TemplatePools::load(synth::default_template_dir()));
  std::map<std::string, std::size_t> evidence;
  for (const auto& s : out.corpus.stays) {
    if (s.sa_label != SaLabel::Neutral || s.si_label != SiLabel::Neutral) evidence[s.stay_id] = 0;
  }
  for (const auto& e : out.ledger) {
    if (e.evidence == Evidence::Yes && evidence.count(e.stay_id)) ++evidence[e.stay_id];
  }
  std::vector<std::size_t> counts;
  double sum = 0.0;
  for (const auto& [id, n] : evidence) {
    counts.push_back(n);
    sum += static_cast<double>(n);
  }
  REQUIRE(!counts.empty());
  CHECK(std::count(counts.begin(), counts.end(), 0u) == 0);
  CHECK(build_neutral_count_distribution(counts).mean() ==
        doctest::Approx(sum / static_cast<double>(counts.size())).epsilon(1e-12));
}

TEST_CASE("assemble_training_input: degenerate configurations") {
  Rng rng(1);
  NoiseConfig none{0.0, build_neutral_count_distribution({3})};
  const std::vector<std::size_t> gold{2, 9, 5};
  std::vector<std::size_t> pool{0, 1, 3, 4, 6, 7, 8};
  for (int i = 0; i < 50; ++i) CHECK(assemble_training_input(gold, pool, none, rng) == std::vector<std::size_t>{2, 5, 9});
  for (int i = 0; i < 200; ++i) {
    const auto picked = assemble_training_input({}, pool, none, rng);
    CHECK(picked.size() == 3);
    CHECK(std::set<std::size_t>(picked.begin(), picked.end()).size() == 3);
    CHECK(std::is_sorted(picked.begin(), picked.end()));
    for (auto p : picked) CHECK(std::find(pool.begin(), pool.end(), p) != pool.end());
  }
  CHECK(assemble_training_input({}, {4, 1}, none, rng) == std::vector<std::size_t>{1, 4});
  CHECK_THROWS_AS(assemble_training_input({}, {}, none, rng), DataError);
  CHECK(assemble_training_input({3}, {}, NoiseConfig{0.05, none.neutral_counts}, rng) == std::vector<std::size_t>{3});
}

TEST_CASE("noise injection matches the binomial mean and variance") {
  Rng rng(2024);
  const NoiseConfig config{0.05, build_neutral_count_distribution({1})};
  std::vector<std::size_t> pool(40);
  std::iota(pool.begin(), pool.end(), 100);
  const std::vector<std::size_t> gold{1, 2};
  const int runs = 10000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < runs; ++i) {
    const double added = static_cast<double>(assemble_training_input(gold, pool, config, rng).size() - gold.size());
    sum += added;
    sum_sq += added * added;
  }
  const double n = 40.0, p = 0.05, mean = n * p, var = n * p * (1 - p);
  const double sample_mean = sum / runs;
  const double sample_var = (sum_sq - runs * sample_mean * sample_mean) / (runs - 1);
  CHECK(sample_mean >= 1.9);
  CHECK(sample_mean <= 2.1);
  CHECK(std::abs(sample_mean - mean) <= 3.0 * std::sqrt(var / runs));
  const double excess_kurtosis = (1.0 - 6.0 * p * (1 - p)) / var;
  const double var_sd = var * std::sqrt(2.0 / (runs - 1) + excess_kurtosis / runs);
  CHECK(std::abs(sample_var - var) <= 3.0 * var_sd);
}

TEST_CASE("neutral-stay counts pass chi-square against the distribution") {
  const auto dist = build_neutral_count_distribution({1, 1, 1, 1, 1, 2, 2, 2, 3, 5});
  const NoiseConfig config{0.05, dist};
  std::vector<std::size_t> pool(30);
  std::iota(pool.begin(), pool.end(), 0);
  Rng rng(77);
  const int runs = 10000;
  std::map<std::size_t, double> observed;
  for (int i = 0; i < runs; ++i) observed[assemble_training_input({}, pool, config, rng).size()] += 1.0;
  double chi2 = 0.0;
  for (const auto& [count, prob] : dist.masses()) {
    const double expected = prob * runs;
    chi2 += (observed[count] - expected) * (observed[count] - expected) / expected;
    observed.erase(count);
  }
  CHECK(observed.empty());
  CHECK(chi2 < chi2_critical_001(dist.masses().size() - 1));
}

TEST_CASE("attention_forward shapes, normalization and input errors") {
  const StayPredictor model(small_config(12), 3);
  Rng rng(5);
  std::vector<nn::Matrix> attention;
  const auto h = model.attention_forward(random_vectors(rng, 1, 12), &attention);
  CHECK(h.rows() == 2);
  CHECK(h.cols() == 12);
  CHECK(attention.size() == 6);
  const auto h5 = model.attention_forward(random_vectors(rng, 5, 12), &attention);
  CHECK(h5.rows() == 6);
  for (const auto& a : attention) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) CHECK(a.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto pred = model.predict(random_vectors(rng, 4, 12));
  CHECK(pred.sa[0] + pred.sa[1] + pred.sa[2] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pred.si[0] + pred.si[1] + pred.si[2] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(model.predict(nn::Matrix(0, 12)), DataError);
  CHECK_THROWS_AS(model.predict(random_vectors(rng, 3, 10)), DataError);
  CHECK_THROWS_AS(StayPredictor(PredictorConfig{10, 3, 2, 0}, 1), ConfigError);
}

TEST_CASE("permutation invariance of the stay prediction") {
  Rng rng(99);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const StayPredictor model(small_config(24), seed);
    const auto vectors = random_vectors(rng, 7, 24);
    const auto base = model.predict(vectors);
    const auto h0 = model.attention_forward(vectors).row(0).eval();
    std::vector<Eigen::Index> order(7);
    std::iota(order.begin(), order.end(), 0);
    for (int trial = 0; trial < 100; ++trial) {
      rng.shuffle(order);
      nn::Matrix shuffled(7, 24);
      for (Eigen::Index i = 0; i < 7; ++i) shuffled.row(i) = vectors.row(order[static_cast<std::size_t>(i)]);
      const auto p = model.predict(shuffled);
      for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(p.sa[k] - base.sa[k]) <= 1e-6);
        CHECK(std::abs(p.si[k] - base.si[k]) <= 1e-6);
      }
      const auto h = model.attention_forward(shuffled).row(0).eval();
      CHECK((h - h0).norm() <= 1e-6 * std::max(1.0, h0.norm()));
    }
  }
}

TEST_CASE("all-zero inputs with a zero prediction vector stay finite") {
  StayPredictor model(small_config(12), 4);
  auto& params = model.params();
  params.value(params.index("v0")).setZero();
  const auto h = model.attention_forward(nn::Matrix::Zero(3, 12));
  CHECK(h.allFinite());
  const auto p = model.predict(nn::Matrix::Zero(3, 12));
  for (int k = 0; k < 3; ++k) {
    CHECK(std::isfinite(p.sa[k]));
    CHECK(std::isfinite(p.si[k]));
  }
}

TEST_CASE("predictor gradients match central finite differences") {
  StayPredictor model(PredictorConfig{12, 3, 2, 0}, 11);
  Rng rng(6);
  const std::vector<std::pair<nn::Matrix, std::pair<std::size_t, std::size_t>>> batch{
      {random_vectors(rng, 3, 12), {0, 2}}, {random_vectors(rng, 1, 12), {2, 1}}, {random_vectors(rng, 4, 12), {1, 0}}};
  auto loss_of = [&](const nn::ParameterStore& params, nn::Gradients* grads) {
    double total = 0.0;
    for (const auto& [vectors, gold] : batch) {
      nn::Graph g(&params);
      StayPredictor m = model;
      m.params() = params;
      const auto f = m.forward(g, vectors);
      const auto l = g.add(g.cross_entropy(f.sa, gold.first, 1.3), g.cross_entropy(f.si, gold.second, 0.7));
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
  CHECK(r.checked == model.params().scalar_count());
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("predictor checkpoint round-trip") {
  const StayPredictor model(PredictorConfig{12, 3, 1, 20}, 2);
  const auto bytes = nn::serialize_checkpoint(model.to_checkpoint({{"retriever_sha256", "abc"}}));
  const auto ckpt = nn::deserialize_checkpoint(bytes);
  CHECK(ckpt.metadata.at("retriever_sha256") == "abc");
  const auto back = StayPredictor::from_checkpoint(ckpt);
  CHECK(back.config().ffn() == 20);
  CHECK(back.params() == model.params());
  Rng rng(1);
  const auto v = random_vectors(rng, 3, 12);
  CHECK(back.predict(v).sa == model.predict(v).sa);
  auto wrong = ckpt;
  wrong.kind = "retriever";
  CHECK_THROWS_AS(StayPredictor::from_checkpoint(wrong), DataError);
}

TEST_CASE("end-to-end predictor training on a synthetic corpus") {
  const auto& t = trained();
  const StayPredictor init(small_config(18), 1);
  const auto a = train_predictor(init, t.train, t.validation, fast_predictor_config(1));

  CHECK(nn::serialize_checkpoint(t.retriever.to_checkpoint()) == t.retriever_bytes);

  std::vector<std::size_t> counts;
  for (const auto& s : t.train) {
    if (s.stay.sa_label != SaLabel::Neutral || s.stay.si_label != SiLabel::Neutral) {
      counts.push_back(s.gold_evidence().size());
    }
  }
  CHECK(a.neutral_counts == build_neutral_count_distribution(counts));

  std::vector<StayPredictionRecord> records;
  for (const auto& s : t.test) {
    auto rng = stay_rng(1, s.stay.stay_id);
    records.push_back(predict_from_paragraphs(a.model, s, a.neutral_counts, rng));
  }
  const auto f1 = stay_macro_f1(t.test, records);
  MESSAGE("stay SA macro-F1 ", f1.sa, ", SI macro-F1 ", f1.si);
  CHECK(f1.sa >= 0.9);
  CHECK(f1.si >= 0.9);

  std::size_t positives = 0, positive_hits = 0, neutral_fallback = 0, neutral_correct = 0;
  for (std::size_t i = 0; i < t.test.size(); ++i) {
    const auto& s = t.test[i];
    const auto& r = records[i];
    CHECK(r.stay_id == s.stay.stay_id);
    CHECK(!r.evidence_paragraph_ids.empty());
    const auto retrieved = s.retrieved();
    CHECK(r.fallback == retrieved.empty());
    if (!r.fallback) {
      REQUIRE(r.evidence_paragraph_ids.size() == retrieved.size());
      for (std::size_t k = 0; k < retrieved.size(); ++k) {
        CHECK(r.evidence_paragraph_ids[k] == s.paragraphs[retrieved[k]].paragraph_id);
      }
    }
    if (s.stay.sa_label == SaLabel::Positive) {
      ++positives;
      positive_hits += r.prediction.sa_label() == SaLabel::Positive;
    }
    if (s.stay.sa_label == SaLabel::Neutral && s.stay.si_label == SiLabel::Neutral) {
      neutral_fallback += r.fallback;
      neutral_correct += r.prediction.sa_label() == SaLabel::Neutral && r.prediction.si_label() == SiLabel::Neutral;
    }
  }
  REQUIRE(positives > 0);
  CHECK(positive_hits * 10 >= positives * 9);
  CHECK(neutral_fallback > 0);
  CHECK(neutral_correct > 0);

  SUBCASE("same seed reproduces the run, another seed does not") {
    const auto b = train_predictor(init, t.train, t.validation, fast_predictor_config(1));
    CHECK(b.model.params() == a.model.params());
    REQUIRE(b.log.size() == a.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(b.log[i].train_loss == a.log[i].train_loss);
    const auto c = train_predictor(init, t.train, t.validation, fast_predictor_config(2));
    bool differs = false;
    for (std::size_t i = 0; i < a.log.size(); ++i) differs |= c.log[i].train_loss != a.log[i].train_loss;
    CHECK(differs);
  }
}

TEST_CASE("inference pipeline errors") {
  const auto& t = trained();
  const StayPredictor model(small_config(18), 1);
  auto stay = t.test.front().stay;
  auto rng = stay_rng(1, stay.stay_id);
  const auto dist = build_neutral_count_distribution({2});
  CHECK_THROWS_AS(infer_stay_pipeline(t.retriever, model, stay, {}, dist, rng), DataError);
  stay.note_ids.clear();
  CHECK_THROWS_AS(infer_stay_pipeline(t.retriever, model, stay, t.test.front().paragraphs, dist, rng), DataError);
}
