// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_CURATION_HPP
#define CLINNER_CURATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "clinner/corpus.hpp"
#include "clinner/error.hpp"
#include "clinner/scheme.hpp"
#include "clinner/tagger.hpp"

namespace clinner {

/// annotator id -> that annotator's tagged copy of one shared corpus
using AnnotatorSet = std::map<std::string, Dataset>;

enum class AgreementUnit { Token, Span };

inline std::string_view unit_name(AgreementUnit unit) { return unit == AgreementUnit::Token ? "token" : "span"; }

struct AgreementReport {
  AgreementUnit unit = AgreementUnit::Token;
  /// all annotators agree
  double unanimity = 1.0;
  /// pairwise[a][b] for a < b
  std::map<std::string, std::map<std::string, double>> pairwise;

  double pairwise_value(const std::string& a, const std::string& b) const {
    return a < b ? pairwise.at(a).at(b) : pairwise.at(b).at(a);
  }
};

namespace detail {

inline void check_annotator_corpus(const AnnotatorSet& set) {
  if (set.size() < 2) throw Error(ErrorKind::InvalidArgument, "agreement needs at least two annotators");
  const auto& [ref_id, ref] = *set.begin();
  for (const auto& [id, ds] : set) {
    auto mismatch = [&](const std::string& what) {
      throw Error(ErrorKind::CorpusMismatch, "annotator '" + id + "' differs from '" + ref_id + "': " + what);
    };
    if (ds.documents.size() != ref.documents.size()) mismatch("document count");
    for (std::size_t d = 0; d < ds.documents.size(); ++d) {
      const auto& a = ds.documents[d].sentences;
      const auto& b = ref.documents[d].sentences;
      if (a.size() != b.size()) mismatch("sentence count in document " + std::to_string(d));
      for (std::size_t s = 0; s < a.size(); ++s) {
        if (a[s].size() != b[s].size()) mismatch("token count in document " + std::to_string(d));
        for (std::size_t t = 0; t < a[s].size(); ++t) {
          if (a[s].tokens[t].text != b[s].tokens[t].text) mismatch("token text in document " + std::to_string(d));
        }
        if (!a[s].tagged()) throw Error(ErrorKind::MissingTags, "annotator '" + id + "' left a sentence untagged");
      }
    }
  }
}

using SpanKey = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, std::string>;

inline std::set<SpanKey> span_keys(const Dataset& ds) {
  std::set<SpanKey> out;
  for (std::size_t d = 0; d < ds.documents.size(); ++d) {
    const auto& doc = ds.documents[d];
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      for (auto& span : tags_to_spans(*doc.sentences[s].tags)) {
        out.emplace(d, s, span.start, span.end, std::move(span.label));
      }
    }
  }
  return out;
}

/// Token unit: share of positions where every member assigns the same tag.
/// Span unit: |intersection| / |union| of the members' span sets. Both are
/// 1 when there is nothing to compare.
inline double group_agreement(const std::vector<const Dataset*>& members, AgreementUnit unit) {
  if (unit == AgreementUnit::Token) {
    std::size_t total = 0;
    std::size_t agree = 0;
    const Dataset& ref = *members.front();
    for (std::size_t d = 0; d < ref.documents.size(); ++d) {
      for (std::size_t s = 0; s < ref.documents[d].sentences.size(); ++s) {
        const auto& tags = *ref.documents[d].sentences[s].tags;
        for (std::size_t t = 0; t < tags.size(); ++t) {
          ++total;
          bool same = std::all_of(members.begin() + 1, members.end(), [&](const Dataset* m) {
            return (*m->documents[d].sentences[s].tags)[t] == tags[t];
          });
          if (same) ++agree;
        }
      }
    }
    return total == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(total);
  }
  std::set<SpanKey> inter = span_keys(*members.front());
  std::set<SpanKey> uni = inter;
  for (std::size_t i = 1; i < members.size(); ++i) {
    auto keys = span_keys(*members[i]);
    std::set<SpanKey> next;
    std::set_intersection(inter.begin(), inter.end(), keys.begin(), keys.end(), std::inserter(next, next.end()));
    inter = std::move(next);
    uni.insert(keys.begin(), keys.end());
  }
  return uni.empty() ? 1.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

}  // namespace detail

/// Raw observed agreement; no chance correction is applied.
inline AgreementReport simple_agreement(const AnnotatorSet& set, AgreementUnit unit = AgreementUnit::Token) {
  detail::check_annotator_corpus(set);
  AgreementReport report;
  report.unit = unit;
  std::vector<const Dataset*> all;
  for (const auto& [_, ds] : set) all.push_back(&ds);
  report.unanimity = detail::group_agreement(all, unit);
  for (auto a = set.begin(); a != set.end(); ++a) {
    for (auto b = std::next(a); b != set.end(); ++b) {
      report.pairwise[a->first][b->first] = detail::group_agreement({&a->second, &b->second}, unit);
    }
  }
  return report;
}

inline nlohmann::json agreement_to_json(const AgreementReport& report) {
  return nlohmann::json{{"unit", unit_name(report.unit)}, {"unanimity", report.unanimity}, {"pairwise", report.pairwise}};
}

struct SelectionCandidate {
  std::string doc_id;
  std::size_t sentence_index = 0;
  double uncertainty = 0.0;
  /// (s1 - s2) / length; +inf when the sentence has a single valid path
  double margin = 0.0;

  friend bool operator==(const SelectionCandidate&, const SelectionCandidate&) = default;
};

/// Margin of the two best paths, normalized by sentence length.
inline double decoding_margin(const TaggerModel& model, const Sentence& sentence) {
  auto best = kbest_decode(model, sentence, 2);
  if (best.size() < 2) return std::numeric_limits<double>::infinity();
  return (best[0].second - best[1].second) / static_cast<double>(sentence.size());
}

inline double margin_uncertainty(double margin) { return std::isinf(margin) ? 0.0 : 1.0 / (1.0 + margin); }

/// The k sentences with the smallest normalized 2-best margin (highest
/// uncertainty 1 / (1 + margin)); ties by (doc_id, sentence_index).
inline std::vector<SelectionCandidate> select_batch(const TaggerModel& model, const Dataset& pool, std::size_t k) {
  if (k == 0) return {};
  std::vector<SelectionCandidate> all;
  for (const auto& doc : pool.documents) {
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      if (doc.sentences[s].tokens.empty()) continue;
      double margin = decoding_margin(model, doc.sentences[s]);
      all.push_back({doc.paper_id, s, margin_uncertainty(margin), margin});
    }
  }
  std::sort(all.begin(), all.end(), [](const SelectionCandidate& a, const SelectionCandidate& b) {
    return std::tie(a.margin, a.doc_id, a.sentence_index) < std::tie(b.margin, b.doc_id, b.sentence_index);
  });
  if (all.size() > k) all.resize(k);
  return all;
}

inline nlohmann::json selection_to_json(const std::vector<SelectionCandidate>& batch) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : batch) {
    out.push_back({{"doc_id", c.doc_id}, {"sentence_index", c.sentence_index}, {"uncertainty", c.uncertainty}});
  }
  return out;
}

}  // namespace clinner

#endif  // CLINNER_CURATION_HPP
