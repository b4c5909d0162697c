#include "scaner/synth/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "scaner/common/error.hpp"
#include "scaner/common/utf8.hpp"

namespace scaner::synth {

std::size_t mix_index(SaLabel sa, SiLabel si) { return index_of(sa) * 3 + index_of(si); }

LabelMix published_label_mix() {
  const std::array<double, 3> sa{377.0, 54.0, 1381.0};
  const std::array<double, 3> si{377.0, 214.0, 1521.0};
  const double sa_total = sa[0] + sa[1] + sa[2];
  const double si_total = si[0] + si[1] + si[2];
  LabelMix mix{};
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) mix[a * 3 + b] = (sa[a] / sa_total) * (si[b] / si_total);
  }
  return mix;
}

void SynthSpec::validate() const {
  double total = 0.0;
  for (double p : label_mix) {
    if (!(p >= 0.0)) throw ConfigError("label_mix entries must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("label_mix must sum to 1");
  for (const auto& [name, r] : {std::pair{"notes_per_stay", notes_per_stay},
                                std::pair{"sentences_per_note", sentences_per_note},
                                std::pair{"evidence_sentences_per_positive_stay", evidence_sentences_per_positive_stay}}) {
    if (r.lo < 1 || r.hi < r.lo) throw ConfigError(std::string(name) + " must be a non-empty positive range");
  }
  if (extra_neutral_stays > n_stays) throw ConfigError("extra_neutral_stays cannot exceed n_stays");
  for (double p : {mixed_evidence_prob, sa_negative_share, repeat_patient_prob, headerless_note_prob,
                   billing_section_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("synth probabilities must be in [0, 1]");
  }
  if (window.window == 0 || window.window <= window.overlap) throw ConfigError("window must exceed overlap");
}

Json LedgerEntry::to_json() const {
  Json j;
  j["paragraph_id"] = paragraph_id;
  j["stay_id"] = stay_id;
  j["evidence"] = scaner::to_string(evidence);
  j["sa_label"] = scaner::to_string(sa());
  j["sa_label_4way"] = scaner::to_string(sa4);
  j["si_label"] = scaner::to_string(si);
  return j;
}

LedgerEntry LedgerEntry::from_json(const Json& j) {
  LedgerEntry e;
  e.paragraph_id = require_string(j, "paragraph_id");
  e.stay_id = require_string(j, "stay_id");
  e.evidence = parse_evidence(require_string(j, "evidence"));
  e.sa4 = parse_sa4(require_string(j, "sa_label_4way"));
  e.si = parse_si_label(require_string(j, "si_label"));
  return e;
}

namespace {

enum class Planted { None, SaPositive, SaNegative, SaUnsure, SiPositive, SiNegative };

const std::array<const char*, 5> kCategories{"Nursing", "Physician", "Discharge summary", "Social Work", "Consult"};

struct PlannedSentence {
  std::string text;
  Planted label = Planted::None;
  std::optional<SaMethod> method;
};

struct PlannedSection {
  std::string header;  // empty for a headerless note
  bool retained = true;
  std::vector<PlannedSentence> body;
};

struct PlannedNote {
  std::string category;
  std::vector<PlannedSection> sections;
};

std::string title_case(const std::string& s) {
  std::string out = s;
  bool start = true;
  for (auto& c : out) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      if (start) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      start = false;
    } else {
      start = true;
    }
  }
  return out;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string header_display(const corpus::SectionDefinition& def, Rng& rng) {
  const auto choice = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(def.header_patterns.size())));
  std::string base = choice == def.header_patterns.size() ? def.name : def.header_patterns[choice];
  return rng.bernoulli(0.3) ? upper(base) : title_case(base);
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(items.size()) - 1))];
}

PlannedSentence filler_sentence(const TemplatePools& pools, const Persona& persona, Rng& rng) {
  return {render(pick(pools.filler, rng).text, persona, ""), Planted::None, std::nullopt};
}

PlannedSentence evidence_sentence(const TemplatePools& pools, Planted kind, const Persona& persona, Rng& rng) {
  const std::vector<Template>* pool = nullptr;
  switch (kind) {
    case Planted::SaPositive: pool = &pools.sa_positive; break;
    case Planted::SaNegative: pool = &pools.sa_negative; break;
    case Planted::SaUnsure: pool = &pools.sa_unsure; break;
    case Planted::SiPositive: pool = &pools.si_positive; break;
    case Planted::SiNegative: pool = &pools.si_negative; break;
    case Planted::None: return filler_sentence(pools, persona, rng);
  }
  const Template& t = pick(*pool, rng);
  const bool is_sa = kind == Planted::SaPositive || kind == Planted::SaNegative || kind == Planted::SaUnsure;
  return {render(t.text, persona, pick(pools.drugs, rng)), kind, is_sa ? t.method : std::nullopt};
}

std::vector<Planted> plan_evidence(const SynthSpec& spec, SaLabel sa, SiLabel si, Rng& rng) {
  std::vector<Planted> items;
  const auto count = [&] {
    return static_cast<std::size_t>(
        rng.uniform_int(spec.evidence_sentences_per_positive_stay.lo, spec.evidence_sentences_per_positive_stay.hi));
  };
  if (sa == SaLabel::Positive) {
    items.insert(items.end(), count(), Planted::SaPositive);
    if (rng.bernoulli(spec.mixed_evidence_prob)) items.push_back(Planted::SaUnsure);
  } else if (sa == SaLabel::NegUnsure) {
    const auto n = count();
    for (std::size_t i = 0; i < n; ++i) {
      items.push_back(rng.bernoulli(spec.sa_negative_share) ? Planted::SaNegative : Planted::SaUnsure);
    }
  }
  if (si == SiLabel::Positive) {
    items.insert(items.end(), count(), Planted::SiPositive);
    if (rng.bernoulli(spec.mixed_evidence_prob)) items.push_back(Planted::SiNegative);
  } else if (si == SiLabel::Negative) {
    items.insert(items.end(), count(), Planted::SiNegative);
  }
  return items;
}

PlannedNote plan_note(const SynthSpec& spec, const TemplatePools& pools, const corpus::SectionFilter& filter,
                      const Persona& persona, Rng& rng) {
  PlannedNote note;
  note.category = kCategories[static_cast<std::size_t>(rng.uniform_int(0, kCategories.size() - 1))];
  const auto body_count =
      static_cast<std::size_t>(rng.uniform_int(spec.sentences_per_note.lo, spec.sentences_per_note.hi));

  if (rng.bernoulli(spec.headerless_note_prob)) {
    PlannedSection s;
    for (std::size_t i = 0; i < body_count; ++i) s.body.push_back(filler_sentence(pools, persona, rng));
    note.sections.push_back(std::move(s));
    return note;
  }

  const auto section_count = static_cast<std::size_t>(rng.uniform_int(1, std::min<std::int64_t>(3, body_count)));
  const auto chosen = rng.sample_without_replacement(filter.allowed.size(), section_count);
  std::vector<std::size_t> order(chosen.begin(), chosen.end());
  rng.shuffle(order);

  // Random composition of body_count into section_count positive parts.
  auto cuts = rng.sample_without_replacement(body_count - 1, section_count - 1);
  std::vector<std::size_t> sizes;
  std::size_t prev = 0;
  for (auto c : cuts) {
    sizes.push_back(c + 1 - prev);
    prev = c + 1;
  }
  sizes.push_back(body_count - prev);

  for (std::size_t k = 0; k < section_count; ++k) {
    PlannedSection s;
    s.header = header_display(filter.allowed[order[k]], rng);
    for (std::size_t i = 0; i < sizes[k]; ++i) s.body.push_back(filler_sentence(pools, persona, rng));
    note.sections.push_back(std::move(s));
  }
  if (!filter.other.empty() && rng.bernoulli(spec.billing_section_prob)) {
    PlannedSection billing;
    billing.header = title_case(filter.other.front().header_patterns.front());
    billing.retained = false;
    const auto n = rng.uniform_int(1, 2);
    for (int i = 0; i < n; ++i) billing.body.push_back(filler_sentence(pools, persona, rng));
    const auto at = rng.uniform_int(0, static_cast<std::int64_t>(note.sections.size()));
    note.sections.insert(note.sections.begin() + at, std::move(billing));
  }
  return note;
}

struct LabelFold {
  bool sa_pos = false, sa_neg = false, sa_uns = false, si_pos = false, si_neg = false;

  void add(Planted p) {
    switch (p) {
      case Planted::SaPositive: sa_pos = true; break;
      case Planted::SaNegative: sa_neg = true; break;
      case Planted::SaUnsure: sa_uns = true; break;
      case Planted::SiPositive: si_pos = true; break;
      case Planted::SiNegative: si_neg = true; break;
      case Planted::None: break;
    }
  }

  bool any() const { return sa_pos || sa_neg || sa_uns || si_pos || si_neg; }
  Sa4 sa4() const { return sa_pos ? Sa4::Positive : sa_uns ? Sa4::Unsure : sa_neg ? Sa4::Negative : Sa4::Neutral; }
  SiLabel si() const { return si_pos ? SiLabel::Positive : si_neg ? SiLabel::Negative : SiLabel::Neutral; }
};

}  // namespace

GeneratedStay generate_stay(const SynthSpec& spec, const TemplatePools& pools, const StayIdentity& identity,
                            std::pair<SaLabel, SiLabel> labels, Rng& rng) {
  const auto filter = corpus::SectionFilter::clinical_default();
  GeneratedStay out;
  out.stay.stay_id = identity.stay_id;
  out.stay.patient_id = identity.patient_id;
  out.stay.sa_label = labels.first;
  out.stay.si_label = labels.second;

  const auto note_count = static_cast<std::size_t>(rng.uniform_int(spec.notes_per_stay.lo, spec.notes_per_stay.hi));
  std::vector<PlannedNote> notes;
  for (std::size_t i = 0; i < note_count; ++i) notes.push_back(plan_note(spec, pools, filter, identity.persona, rng));

  // Evidence goes into retained sections only, at a random body position.
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t n = 0; n < notes.size(); ++n) {
    for (std::size_t s = 0; s < notes[n].sections.size(); ++s) {
      if (notes[n].sections[s].retained) slots.emplace_back(n, s);
    }
  }
  for (Planted kind : plan_evidence(spec, labels.first, labels.second, rng)) {
    const auto [n, s] = slots[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(slots.size()) - 1))];
    auto& body = notes[n].sections[s].body;
    const auto at = rng.uniform_int(0, static_cast<std::int64_t>(body.size()));
    body.insert(body.begin() + at, evidence_sentence(pools, kind, identity.persona, rng));
  }

  for (std::size_t n = 0; n < notes.size(); ++n) {
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "-N%02zu", n + 1);
    corpus::ClinicalNote note{identity.stay_id + suffix, identity.patient_id, identity.stay_id, notes[n].category, {}};

    std::string text;
    std::size_t cp = 0;  // code points emitted so far
    auto emit = [&](const std::string& piece) {
      text += piece;
      cp += utf8::length(piece);
    };
    std::size_t paragraph_ordinal = 0;
    for (std::size_t s = 0; s < notes[n].sections.size(); ++s) {
      const auto& sec = notes[n].sections[s];
      if (s > 0) emit("\n\n");
      // Sentence-level plan of this section as the note's sentence list sees it.
      std::vector<Planted> sentence_labels;
      if (!sec.header.empty()) {
        emit(sec.header + ":\n");
        sentence_labels.push_back(Planted::None);
      }
      for (std::size_t i = 0; i < sec.body.size(); ++i) {
        if (i > 0) emit(rng.bernoulli(0.15) ? "\n" : " ");
        const auto& sent = sec.body[i];
        const std::size_t start = cp;
        emit(sent.text);
        sentence_labels.push_back(sent.label);
        if (sent.label == Planted::None || !sec.retained) continue;
        corpus::EvidenceAnnotation a;
        a.note_id = note.note_id;
        a.start = start;
        a.end = cp;
        switch (sent.label) {
          case Planted::SaPositive: a.sa_label = SaAnnotation::Positive; break;
          case Planted::SaNegative: a.sa_label = SaAnnotation::Negative; break;
          case Planted::SaUnsure: a.sa_label = SaAnnotation::Unsure; break;
          case Planted::SiPositive: a.si_label = SiLabel::Positive; break;
          case Planted::SiNegative: a.si_label = SiLabel::Negative; break;
          case Planted::None: break;
        }
        a.event = a.sa_label ? EventType::SA : EventType::SI;
        a.method = sent.method;
        out.annotations.push_back(a);
      }
      if (!sec.retained) continue;
      for (const auto& w : corpus::window_paragraphs(sentence_labels.size(), spec.window)) {
        LabelFold fold;
        for (auto i = w.first; i <= w.last; ++i) fold.add(sentence_labels[i]);
        LedgerEntry e;
        e.paragraph_id = corpus::paragraph_id(note.note_id, paragraph_ordinal++);
        e.stay_id = identity.stay_id;
        e.evidence = fold.any() ? Evidence::Yes : Evidence::No;
        e.sa4 = fold.sa4();
        e.si = fold.si();
        out.ledger.push_back(std::move(e));
      }
    }
    note.text = std::move(text);
    out.stay.note_ids.push_back(note.note_id);
    out.notes.push_back(std::move(note));
  }
  return out;
}

SynthCorpus generate_corpus(const SynthSpec& spec, const TemplatePools& pools) {
  spec.validate();
  Rng master(spec.seed);
  const std::vector<double> weights(spec.label_mix.begin(), spec.label_mix.end());
  std::vector<StayIdentity> patients;
  SynthCorpus out;
  for (std::size_t i = 0; i < spec.n_stays; ++i) {
    std::pair<SaLabel, SiLabel> labels{SaLabel::Neutral, SiLabel::Neutral};
    if (i < spec.n_stays - spec.extra_neutral_stays) {
      const auto k = master.categorical(weights);
      labels = {static_cast<SaLabel>(k / 3), static_cast<SiLabel>(k % 3)};
    }
    StayIdentity id;
    if (!patients.empty() && master.bernoulli(spec.repeat_patient_prob)) {
      id = patients[static_cast<std::size_t>(master.uniform_int(0, static_cast<std::int64_t>(patients.size()) - 1))];
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "P%05zu", patients.size() + 1);
      id.patient_id = buf;
      id.persona.female = master.bernoulli(0.5);
      patients.push_back(id);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%05zu", i + 1);
    id.stay_id = buf;

    Rng stay_rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
    auto stay = generate_stay(spec, pools, id, labels, stay_rng);
    for (auto& n : stay.notes) out.corpus.notes.push_back(std::move(n));
    for (auto& a : stay.annotations) out.corpus.annotations.push_back(std::move(a));
    for (auto& e : stay.ledger) out.ledger.push_back(std::move(e));
    out.corpus.stays.push_back(std::move(stay.stay));
  }
  return out;
}

void write_synth_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  corpus::save_corpus(corpus.corpus, corpus::CorpusPaths::in_directory(dir));
  std::vector<Json> rows;
  rows.reserve(corpus.ledger.size());
  for (const auto& e : corpus.ledger) rows.push_back(e.to_json());
  write_jsonl(dir / "ledger.jsonl", rows);
}

std::vector<LedgerEntry> read_ledger(const std::filesystem::path& path) {
  std::vector<LedgerEntry> out;
  read_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(LedgerEntry::from_json(j)); });
  return out;
}

Json spec_to_json(const SynthSpec& spec) {
  Json j;
  j["n_stays"] = spec.n_stays;
  Json mix = Json::object();
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      mix[std::string(to_string(static_cast<SaLabel>(a))) + "," + std::string(to_string(static_cast<SiLabel>(b)))] =
          spec.label_mix[a * 3 + b];
    }
  }
  j["label_mix"] = mix;
  j["notes_per_stay"] = {spec.notes_per_stay.lo, spec.notes_per_stay.hi};
  j["sentences_per_note"] = {spec.sentences_per_note.lo, spec.sentences_per_note.hi};
  j["evidence_sentences_per_positive_stay"] = {spec.evidence_sentences_per_positive_stay.lo,
                                               spec.evidence_sentences_per_positive_stay.hi};
  j["seed"] = spec.seed;
  j["extra_neutral_stays"] = spec.extra_neutral_stays;
  j["mixed_evidence_prob"] = spec.mixed_evidence_prob;
  j["sa_negative_share"] = spec.sa_negative_share;
  j["repeat_patient_prob"] = spec.repeat_patient_prob;
  j["headerless_note_prob"] = spec.headerless_note_prob;
  j["billing_section_prob"] = spec.billing_section_prob;
  j["window_size"] = spec.window.window;
  j["overlap"] = spec.window.overlap;
  return j;
}

}  // namespace scaner::synth
