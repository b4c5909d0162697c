#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scaner/common/jsonl.hpp"
#include "scaner/common/labels.hpp"
#include "scaner/common/rng.hpp"
#include "scaner/corpus/paragraphs.hpp"
#include "scaner/corpus/sections.hpp"
#include "scaner/corpus/types.hpp"
#include "scaner/synth/templates.hpp"

namespace scaner::synth {

struct IntRange {
  int lo = 1;
  int hi = 1;
};

// Probabilities over (sa, si) pairs, indexed sa * 3 + si in class order.
using LabelMix = std::array<double, 9>;

std::size_t mix_index(SaLabel sa, SiLabel si);

// Independent product of the training-split stay marginals:
// SA 377 : 54 : 1381 and SI 377 : 214 : 1521.
LabelMix published_label_mix();

struct SynthSpec {
  std::size_t n_stays = 500;
  LabelMix label_mix = published_label_mix();
  IntRange notes_per_stay{2, 4};
  IntRange sentences_per_note{12, 40};
  IntRange evidence_sentences_per_positive_stay{1, 3};
  std::uint64_t seed = 1;

  // The last `extra_neutral_stays` of the n_stays are forced to
  // (neutral, neutral), mirroring neutral stays added from outside the cohort.
  std::size_t extra_neutral_stays = 0;
  // Chance that a positive stay also carries one lower-precedence sentence
  // (an unsure SA or a negative SI).
  double mixed_evidence_prob = 0.25;
  // Share of neg_unsure evidence drawn from the negative pool (rest: unsure).
  double sa_negative_share = 0.25;
  // Chance that a new stay reuses an earlier patient.
  double repeat_patient_prob = 0.05;
  double headerless_note_prob = 0.1;
  double billing_section_prob = 0.25;
  corpus::WindowConfig window;

  // Throws ConfigError naming the first violated invariant.
  void validate() const;
};

struct LedgerEntry {
  std::string paragraph_id;
  std::string stay_id;
  Evidence evidence = Evidence::No;
  Sa4 sa4 = Sa4::Neutral;
  SiLabel si = SiLabel::Neutral;

  SaLabel sa() const { return merge_sa_label(sa4); }
  Json to_json() const;
  static LedgerEntry from_json(const Json& j);
  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

struct StayIdentity {
  std::string stay_id;
  std::string patient_id;
  Persona persona;
};

struct GeneratedStay {
  std::vector<corpus::ClinicalNote> notes;
  std::vector<corpus::EvidenceAnnotation> annotations;
  corpus::HospitalStay stay;
  std::vector<LedgerEntry> ledger;
};

// One stay whose notes embed evidence sentences matching the requested
// labels among filler. The ledger is computed from the generator's own
// record of which sentence carries which label, not by parsing the text.
GeneratedStay generate_stay(const SynthSpec& spec, const TemplatePools& pools, const StayIdentity& identity,
                            std::pair<SaLabel, SiLabel> labels, Rng& rng);

struct SynthCorpus {
  corpus::Corpus corpus;
  std::vector<LedgerEntry> ledger;
};

SynthCorpus generate_corpus(const SynthSpec& spec, const TemplatePools& pools);

// Writes notes/annotations/stays/ledger JSONL files into `dir`.
void write_synth_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);
std::vector<LedgerEntry> read_ledger(const std::filesystem::path& path);

Json spec_to_json(const SynthSpec& spec);

}  // namespace scaner::synth
