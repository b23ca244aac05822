// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_SCHEME_HPP
#define CLINNER_SCHEME_HPP

#include <algorithm>
#include <compare>
#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clinner/error.hpp"
#include "clinner/text.hpp"

namespace clinner {

/// Closed, ordered set of entity labels. Order matters: it fixes the tag
/// order used for tie-breaking by the decoder.
class LabelRegistry {
 public:
  LabelRegistry() = default;

  explicit LabelRegistry(std::vector<std::string> labels) : labels_(std::move(labels)) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      const auto& label = labels_[i];
      if (label.empty() || text::contains_space(label)) {
        throw Error(ErrorKind::InvalidRegistry, "label '" + label + "' is empty or contains whitespace");
      }
      if (!index_.emplace(label, i).second) {
        throw Error(ErrorKind::InvalidRegistry, "duplicate label '" + label + "'");
      }
    }
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool contains(std::string_view label) const { return index_.contains(std::string(label)); }

  std::optional<std::size_t> index_of(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// SHA-256 over the newline-joined labels; recorded in model metadata.
  std::string digest() const {
    std::string joined;
    for (const auto& label : labels_) {
      joined += label;
      joined += '\n';
    }
    return text::sha256_hex(joined);
  }

  friend bool operator==(const LabelRegistry& a, const LabelRegistry& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The clinical entity inventory used by the JSL clinical NER models.
inline const LabelRegistry& default_registry() {
  static const LabelRegistry registry(std::vector<std::string>{
    "Social_History_Header", "Oncology_Therapy", "Blood_Pressure", "Respiration",
    "Performance_Status", "Family_History_Header", "Dosage", "Clinical_Dept", "Diet",
    "Procedure", "HDL", "Weight", "Admission_Discharge", "LDL", "Kidney_Disease", "Oncological",
    "Route", "Imaging_Technique", "Puerperium", "Overweight", "Temperature", "Diabetes",
    "Vaccine", "Age", "Test_Result", "Employment", "Time", "Obesity", "EKG_Findings",
    "Pregnancy", "Communicable_Disease", "BMI", "Strength", "Tumor_Finding", "Section_Header",
    "RelativeDate", "ImagingFindings", "Death_Entity", "Date", "Cerebrovascular_Disease",
    "Treatment", "Labour_Delivery", "Pregnancy_Delivery_Puerperium", "Direction",
    "Internal_organ_or_component", "Psychological_Condition", "Form", "Medical_Device", "Test",
    "Symptom", "Disease_Syndrome_Disorder", "Staging", "Birth_Entity", "Hyperlipidemia",
    "O2_Saturation", "Frequency", "External_body_part_or_region", "Drug_Ingredient",
    "Vital_Signs_Header", "Substance_Quantity", "Race_Ethnicity", "VS_Finding",
    "Injury_or_Poisoning", "Medical_History_Header", "Alcohol", "Triglycerides",
    "Total_Cholesterol", "Sexually_Active_or_Sexual_Orientation", "Female_Reproductive_Status",
    "Relationship_Status", "Drug_BrandName", "RelativeTime", "Duration", "Hypertension",
    "Metastasis", "Gender", "Oxygen_Therapy", "Pulse", "Heart_Disease", "Modifier", "Allergen",
    "Smoking", "Substance", "Cancer_Modifier", "Fetus_NewBorn", "Height",
  });
  return registry;
}

/// Registry file: one label per line; blank lines and '#' comments ignored.
inline LabelRegistry parse_registry(std::istream& in) {
  std::vector<std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    text::require_utf8(line, line_no);
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto label = text::trim(line);
    if (label.empty()) continue;
    if (text::contains_space(label)) {
      throw Error(ErrorKind::InvalidRegistry, "label contains whitespace", line_no);
    }
    labels.emplace_back(label);
  }
  return LabelRegistry(std::move(labels));
}

using TagSequence = std::vector<std::string>;

enum class TagPrefix { Outside, Begin, Inside };

struct ParsedTag {
  TagPrefix prefix = TagPrefix::Outside;
  std::string_view label;
};

/// "O", "B-<label>" or "I-<label>"; anything else is malformed.
inline std::optional<ParsedTag> parse_tag(std::string_view tag) {
  if (tag == "O") return ParsedTag{};
  if (tag.size() < 3 || tag[1] != '-') return std::nullopt;
  if (tag[0] == 'B') return ParsedTag{TagPrefix::Begin, tag.substr(2)};
  if (tag[0] == 'I') return ParsedTag{TagPrefix::Inside, tag.substr(2)};
  return std::nullopt;
}

enum class ViolationKind { MalformedTag, UnknownLabel, DanglingInside };

struct Violation {
  std::size_t index = 0;
  ViolationKind kind = ViolationKind::MalformedTag;
  std::string tag;

  friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::string_view violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::MalformedTag: return "malformed tag";
    case ViolationKind::UnknownLabel: return "unknown label";
    case ViolationKind::DanglingInside: return "dangling I- tag";
  }
  return "violation";
}

/// Every position breaking strict IOB2 or registry membership, in order.
inline std::vector<Violation> validate_tags(const TagSequence& tags, const LabelRegistry& registry) {
  std::vector<Violation> out;
  std::optional<ParsedTag> prev;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto parsed = parse_tag(tags[i]);
    if (!parsed) {
      out.push_back({i, ViolationKind::MalformedTag, tags[i]});
    } else if (parsed->prefix != TagPrefix::Outside && !registry.contains(parsed->label)) {
      out.push_back({i, ViolationKind::UnknownLabel, tags[i]});
    } else if (parsed->prefix == TagPrefix::Inside &&
               (!prev || prev->prefix == TagPrefix::Outside || prev->label != parsed->label)) {
      out.push_back({i, ViolationKind::DanglingInside, tags[i]});
    }
    prev = parsed;
  }
  return out;
}

/// Rewrites IOB1-style entity starts ("I-X" after "O", after another label,
/// or at position 0) to "B-X". Valid IOB2 input is returned unchanged.
inline TagSequence repair_tags(const TagSequence& tags, const LabelRegistry& registry) {
  TagSequence out;
  out.reserve(tags.size());
  std::optional<ParsedTag> prev;
  for (const auto& tag : tags) {
    auto parsed = parse_tag(tag);
    if (!parsed) throw Error(ErrorKind::UnknownLabel, "malformed tag '" + tag + "'");
    if (parsed->prefix != TagPrefix::Outside && !registry.contains(parsed->label)) {
      throw Error(ErrorKind::UnknownLabel, "label '" + std::string(parsed->label) + "' not in registry");
    }
    if (parsed->prefix == TagPrefix::Inside &&
        (!prev || prev->prefix == TagPrefix::Outside || prev->label != parsed->label)) {
      out.push_back("B-" + std::string(parsed->label));
    } else {
      out.push_back(tag);
    }
    prev = parsed;
  }
  return out;
}

/// Half-open token range [start, end) carrying one entity label.
struct LabeledSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  friend auto operator<=>(const LabeledSpan&, const LabeledSpan&) = default;
  friend bool operator==(const LabeledSpan&, const LabeledSpan&) = default;
};

inline std::vector<LabeledSpan> tags_to_spans(const TagSequence& tags) {
  std::vector<LabeledSpan> spans;
  std::optional<LabeledSpan> open;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto parsed = parse_tag(tags[i]);
    if (!parsed) {
      throw Error(ErrorKind::InvalidScheme, "malformed tag '" + tags[i] + "' at index " + std::to_string(i));
    }
    if (parsed->prefix == TagPrefix::Inside) {
      if (!open || open->label != parsed->label) {
        throw Error(ErrorKind::InvalidScheme, "dangling '" + tags[i] + "' at index " + std::to_string(i));
      }
      open->end = i + 1;
      continue;
    }
    if (open) spans.push_back(std::move(*open));
    open.reset();
    if (parsed->prefix == TagPrefix::Begin) open = LabeledSpan{i, i + 1, std::string(parsed->label)};
  }
  if (open) spans.push_back(std::move(*open));
  return spans;
}

/// Exact inverse of tags_to_spans. Spans may arrive in any order but must
/// not overlap.
inline TagSequence spans_to_tags(std::vector<LabeledSpan> spans, std::size_t length) {
  std::sort(spans.begin(), spans.end());
  TagSequence tags(length, "O");
  std::size_t covered = 0;
  for (const auto& span : spans) {
    if (span.start >= span.end || span.end > length || span.label.empty()) {
      throw Error(ErrorKind::SpanOutOfRange, "span [" + std::to_string(span.start) + ", " +
                                                 std::to_string(span.end) + ") invalid for length " +
                                                 std::to_string(length));
    }
    if (span.start < covered) {
      throw Error(ErrorKind::OverlappingSpans,
                  "span starting at " + std::to_string(span.start) + " overlaps its predecessor");
    }
    tags[span.start] = "B-" + span.label;
    for (std::size_t i = span.start + 1; i < span.end; ++i) tags[i] = "I-" + span.label;
    covered = span.end;
  }
  return tags;
}

}  // namespace clinner

#endif  // CLINNER_SCHEME_HPP
