#include "scaner/corpus/paragraphs.hpp"

#include <algorithm>
#include <cstdio>

#include "scaner/common/error.hpp"
#include "scaner/common/utf8.hpp"

namespace scaner::corpus {

std::vector<WindowRange> window_paragraphs(std::size_t sentence_count, const WindowConfig& config) {
  if (config.window == 0 || config.window <= config.overlap) {
    throw ConfigError("window size must exceed overlap (window=" + std::to_string(config.window) +
                      ", overlap=" + std::to_string(config.overlap) + ")");
  }
  std::vector<WindowRange> windows;
  if (sentence_count == 0) return windows;
  const std::size_t stride = config.window - config.overlap;
  for (std::size_t start = 0;; start += stride) {
    const std::size_t last = std::min(start + config.window, sentence_count) - 1;
    windows.push_back({start, last});
    if (last + 1 == sentence_count) break;
  }
  return windows;
}

std::vector<SentenceLabels> label_sentences(const std::string& note_id, const std::vector<SentenceSpan>& sentences,
                                            const std::vector<EvidenceAnnotation>& annotations) {
  std::vector<SentenceLabels> labels(sentences.size());
  for (const auto& a : annotations) {
    if (a.note_id != note_id) continue;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const auto& s = sentences[i];
      if (!(a.start < s.end && s.begin < a.end)) continue;
      auto& l = labels[i];
      if (a.event == EventType::SA && a.sa_label) {
        switch (*a.sa_label) {
          case SaAnnotation::Positive: l.sa_positive = true; break;
          case SaAnnotation::Negative: l.sa_negative = true; break;
          case SaAnnotation::Unsure: l.sa_unsure = true; break;
        }
      } else if (a.event == EventType::SI && a.si_label) {
        if (*a.si_label == SiLabel::Positive) l.si_positive = true;
        if (*a.si_label == SiLabel::Negative) l.si_negative = true;
      }
    }
  }
  return labels;
}

ParagraphLabels derive_paragraph_labels(const WindowRange& range, const std::vector<SentenceLabels>& sentence_labels) {
  if (range.last >= sentence_labels.size() || range.first > range.last) {
    throw ConfigError("paragraph range outside the sentence list");
  }
  SentenceLabels any;
  for (std::size_t i = range.first; i <= range.last; ++i) {
    const auto& l = sentence_labels[i];
    any.sa_positive |= l.sa_positive;
    any.sa_negative |= l.sa_negative;
    any.sa_unsure |= l.sa_unsure;
    any.si_positive |= l.si_positive;
    any.si_negative |= l.si_negative;
  }
  ParagraphLabels out;
  out.evidence = any.any() ? Evidence::Yes : Evidence::No;
  out.sa4 = any.sa_positive ? Sa4::Positive
            : any.sa_unsure ? Sa4::Unsure
            : any.sa_negative ? Sa4::Negative
                              : Sa4::Neutral;
  out.si = any.si_positive ? SiLabel::Positive : any.si_negative ? SiLabel::Negative : SiLabel::Neutral;
  return out;
}

ParagraphLabels derive_paragraph_labels(const WindowRange& range, const std::string& note_id,
                                        const std::vector<EvidenceAnnotation>& annotations,
                                        const std::vector<SentenceSpan>& sentences,
                                        const std::vector<std::string>& known_note_ids) {
  for (const auto& a : annotations) {
    if (std::find(known_note_ids.begin(), known_note_ids.end(), a.note_id) == known_note_ids.end()) {
      throw DataError("annotation references unknown note_id '" + a.note_id + "'");
    }
  }
  return derive_paragraph_labels(range, label_sentences(note_id, sentences, annotations));
}

NoteSentences sentences_for_note(std::u32string_view text, const SectionFilter& filter) {
  NoteSentences out;
  for (const auto& seg : filter_sections(text, filter)) {
    const std::size_t first = out.sentences.size();
    for (auto span : segment_sentences(text.substr(seg.begin, seg.end - seg.begin))) {
      out.sentences.push_back({span.begin + seg.begin, span.end + seg.begin});
    }
    if (out.sentences.size() > first) out.segment_ranges.emplace_back(first, out.sentences.size());
  }
  return out;
}

std::string paragraph_id(const std::string& note_id, std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "/p%04zu", ordinal);
  return note_id + buf;
}

std::vector<Paragraph> build_paragraphs(const ClinicalNote& note, const std::vector<EvidenceAnnotation>& annotations,
                                        const SectionFilter& filter, const WindowConfig& config) {
  const std::u32string text = utf8::decode(note.text);
  const NoteSentences ns = sentences_for_note(text, filter);
  const auto sentence_labels = label_sentences(note.note_id, ns.sentences, annotations);

  std::vector<Paragraph> paragraphs;
  for (const auto& [seg_first, seg_end] : ns.segment_ranges) {
    for (const auto& w : window_paragraphs(seg_end - seg_first, config)) {
      const WindowRange range{seg_first + w.first, seg_first + w.last};
      Paragraph p;
      p.paragraph_id = paragraph_id(note.note_id, paragraphs.size());
      p.note_id = note.note_id;
      p.stay_id = note.stay_id;
      p.patient_id = note.patient_id;
      p.first_sentence = range.first;
      p.last_sentence = range.last;
      std::u32string joined;
      for (std::size_t i = range.first; i <= range.last; ++i) {
        if (!joined.empty()) joined.push_back(U' ');
        const auto& s = ns.sentences[i];
        joined.append(text, s.begin, s.end - s.begin);
      }
      p.text = utf8::encode(joined);
      const auto labels = derive_paragraph_labels(range, sentence_labels);
      p.evidence = labels.evidence;
      p.sa4 = labels.sa4;
      p.sa_label = merge_sa_label(labels.sa4);
      p.si_label = labels.si;
      paragraphs.push_back(std::move(p));
    }
  }
  return paragraphs;
}

}  // namespace scaner::corpus
