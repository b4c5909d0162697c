#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "scaner/corpus/sections.hpp"
#include "scaner/corpus/sentences.hpp"
#include "scaner/corpus/types.hpp"

namespace scaner::corpus {

// Inclusive sentence index range.
struct WindowRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const { return last - first + 1; }
  friend bool operator==(const WindowRange&, const WindowRange&) = default;
};

struct WindowConfig {
  std::size_t window = 20;
  std::size_t overlap = 5;
};

// Sliding windows over `sentence_count` sentences. Windows start at 0 with
// stride window - overlap; generation stops after the first window that
// reaches the final sentence. Throws ConfigError unless window > overlap.
std::vector<WindowRange> window_paragraphs(std::size_t sentence_count, const WindowConfig& config = {});

// Per-sentence annotation summary: which annotation labels touch the sentence.
struct SentenceLabels {
  bool sa_positive = false;
  bool sa_negative = false;
  bool sa_unsure = false;
  bool si_positive = false;
  bool si_negative = false;

  bool any() const { return sa_positive || sa_negative || sa_unsure || si_positive || si_negative; }
};

// Marks each sentence that overlaps (non-empty intersection) an annotation
// of this note. Annotations for other notes are ignored.
std::vector<SentenceLabels> label_sentences(const std::string& note_id,
                                            const std::vector<SentenceSpan>& sentences,
                                            const std::vector<EvidenceAnnotation>& annotations);

struct ParagraphLabels {
  Evidence evidence = Evidence::No;
  Sa4 sa4 = Sa4::Neutral;
  SiLabel si = SiLabel::Neutral;

  friend bool operator==(const ParagraphLabels&, const ParagraphLabels&) = default;
};

// SA precedence positive > unsure > negative > neutral; SI precedence
// positive > negative > neutral.
ParagraphLabels derive_paragraph_labels(const WindowRange& range, const std::vector<SentenceLabels>& sentence_labels);

// Full form over raw annotations. Throws DataError if an annotation names a
// note_id that is not in `known_note_ids`.
ParagraphLabels derive_paragraph_labels(const WindowRange& range, const std::string& note_id,
                                        const std::vector<EvidenceAnnotation>& annotations,
                                        const std::vector<SentenceSpan>& sentences,
                                        const std::vector<std::string>& known_note_ids);

// Sentences of a note, grouped by retained section segment.
struct NoteSentences {
  std::vector<SentenceSpan> sentences;  // note-level list, note coordinates
  std::vector<std::pair<std::size_t, std::size_t>> segment_ranges;  // [first, end) into sentences
};

NoteSentences sentences_for_note(std::u32string_view text, const SectionFilter& filter);

// Section filter, sentence split, windowing (per segment) and labeling for
// one note. `annotations` may contain entries for other notes.
std::vector<Paragraph> build_paragraphs(const ClinicalNote& note, const std::vector<EvidenceAnnotation>& annotations,
                                        const SectionFilter& filter, const WindowConfig& config);

// Paragraph ids are "<note_id>/p<ordinal>" with a zero-padded ordinal.
std::string paragraph_id(const std::string& note_id, std::size_t ordinal);

}  // namespace scaner::corpus
