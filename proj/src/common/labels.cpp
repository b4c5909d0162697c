#include "scaner/common/labels.hpp"

#include "scaner/common/error.hpp"

namespace scaner {

namespace {

[[noreturn]] void unknown(std::string_view kind, std::string_view value) {
  throw DataError("unknown " + std::string(kind) + " label '" + std::string(value) + "'");
}

}  // namespace

std::string_view to_string(Evidence v) { return v == Evidence::Yes ? "yes" : "no"; }

std::string_view to_string(SaAnnotation v) {
  switch (v) {
    case SaAnnotation::Positive: return "positive";
    case SaAnnotation::Negative: return "negative";
    case SaAnnotation::Unsure: return "unsure";
  }
  return "?";
}

std::string_view to_string(Sa4 v) {
  switch (v) {
    case Sa4::Positive: return "positive";
    case Sa4::Negative: return "negative";
    case Sa4::Unsure: return "unsure";
    case Sa4::Neutral: return "neutral";
  }
  return "?";
}

std::string_view to_string(SaLabel v) {
  switch (v) {
    case SaLabel::Positive: return "positive";
    case SaLabel::NegUnsure: return "neg_unsure";
    case SaLabel::Neutral: return "neutral";
  }
  return "?";
}

std::string_view to_string(SiLabel v) {
  switch (v) {
    case SiLabel::Positive: return "positive";
    case SiLabel::Negative: return "negative";
    case SiLabel::Neutral: return "neutral";
  }
  return "?";
}

std::string_view to_string(EventType v) { return v == EventType::SA ? "SA" : "SI"; }

std::string_view to_string(SaMethod v) {
  switch (v) {
    case SaMethod::T36_T50: return "T36_T50";
    case SaMethod::T51_T65: return "T51_T65";
    case SaMethod::T71: return "T71";
    case SaMethod::X71_X83: return "X71_X83";
  }
  return "?";
}

Evidence parse_evidence(std::string_view s) {
  if (s == "yes") return Evidence::Yes;
  if (s == "no") return Evidence::No;
  unknown("evidence", s);
}

SaAnnotation parse_sa_annotation(std::string_view s) {
  if (s == "positive") return SaAnnotation::Positive;
  if (s == "negative") return SaAnnotation::Negative;
  if (s == "unsure") return SaAnnotation::Unsure;
  unknown("SA annotation", s);
}

Sa4 parse_sa4(std::string_view s) {
  if (s == "positive") return Sa4::Positive;
  if (s == "negative") return Sa4::Negative;
  if (s == "unsure") return Sa4::Unsure;
  if (s == "neutral") return Sa4::Neutral;
  unknown("SA", s);
}

SaLabel parse_sa_label(std::string_view s) {
  if (s == "positive") return SaLabel::Positive;
  if (s == "neg_unsure") return SaLabel::NegUnsure;
  if (s == "neutral") return SaLabel::Neutral;
  unknown("SA", s);
}

SiLabel parse_si_label(std::string_view s) {
  if (s == "positive") return SiLabel::Positive;
  if (s == "negative") return SiLabel::Negative;
  if (s == "neutral") return SiLabel::Neutral;
  unknown("SI", s);
}

EventType parse_event_type(std::string_view s) {
  if (s == "SA") return EventType::SA;
  if (s == "SI") return EventType::SI;
  unknown("event", s);
}

SaMethod parse_sa_method(std::string_view s) {
  if (s == "T36_T50") return SaMethod::T36_T50;
  if (s == "T51_T65") return SaMethod::T51_T65;
  if (s == "T71") return SaMethod::T71;
  if (s == "X71_X83") return SaMethod::X71_X83;
  unknown("SA method", s);
}

SaLabel merge_sa_label(Sa4 label) {
  switch (label) {
    case Sa4::Positive: return SaLabel::Positive;
    case Sa4::Negative:
    case Sa4::Unsure: return SaLabel::NegUnsure;
    case Sa4::Neutral: return SaLabel::Neutral;
  }
  return SaLabel::Neutral;
}

const std::array<std::string, kEvidenceClasses>& evidence_class_names() {
  static const std::array<std::string, kEvidenceClasses> names{"Yes", "No"};
  return names;
}

const std::array<std::string, kSaClasses>& sa_class_names() {
  static const std::array<std::string, kSaClasses> names{"Positive", "Neg_Unsure", "Neutral-SA"};
  return names;
}

const std::array<std::string, kSiClasses>& si_class_names() {
  static const std::array<std::string, kSiClasses> names{"Positive", "Negative", "Neutral-SI"};
  return names;
}

}  // namespace scaner
