#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace scaner {

// Label vocabularies. The integer value of every enumerator is its class
// index in model heads and confusion matrices, so the order is part of the
// checkpoint format.

enum class Evidence { Yes = 0, No = 1 };

// Evidence-level SA label as annotated.
enum class SaAnnotation { Positive = 0, Negative = 1, Unsure = 2 };

// Four-way paragraph SA label before merging.
enum class Sa4 { Positive = 0, Negative = 1, Unsure = 2, Neutral = 3 };

// Merged SA label used for training and stay-level prediction.
enum class SaLabel { Positive = 0, NegUnsure = 1, Neutral = 2 };

enum class SiLabel { Positive = 0, Negative = 1, Neutral = 2 };

enum class EventType { SA = 0, SI = 1 };

// ICD method groups for SA annotations.
enum class SaMethod { T36_T50 = 0, T51_T65 = 1, T71 = 2, X71_X83 = 3 };

inline constexpr std::size_t kEvidenceClasses = 2;
inline constexpr std::size_t kSaClasses = 3;
inline constexpr std::size_t kSiClasses = 3;

std::string_view to_string(Evidence v);
std::string_view to_string(SaAnnotation v);
std::string_view to_string(Sa4 v);
std::string_view to_string(SaLabel v);
std::string_view to_string(SiLabel v);
std::string_view to_string(EventType v);
std::string_view to_string(SaMethod v);

// Parsers throw DataError on unknown strings.
Evidence parse_evidence(std::string_view s);
SaAnnotation parse_sa_annotation(std::string_view s);
Sa4 parse_sa4(std::string_view s);
SaLabel parse_sa_label(std::string_view s);
SiLabel parse_si_label(std::string_view s);
EventType parse_event_type(std::string_view s);
SaMethod parse_sa_method(std::string_view s);

// negative and unsure collapse to neg_unsure; everything else is unchanged.
SaLabel merge_sa_label(Sa4 label);

// Display names in class-index order, as used in report tables.
const std::array<std::string, kEvidenceClasses>& evidence_class_names();
const std::array<std::string, kSaClasses>& sa_class_names();
const std::array<std::string, kSiClasses>& si_class_names();

template <typename E>
constexpr std::size_t index_of(E e) {
  return static_cast<std::size_t>(e);
}

}  // namespace scaner
