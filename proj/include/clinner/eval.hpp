// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_EVAL_HPP
#define CLINNER_EVAL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clinner/corpus.hpp"
#include "clinner/error.hpp"
#include "clinner/scheme.hpp"

// Exact-match span scoring (CoNLL convention): a predicted span counts only
// when start, end and label all equal a gold span in the same sentence.
namespace clinner {

struct PrfScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  friend bool operator==(const PrfScores&, const PrfScores&) = default;
};

/// A zero denominator yields 0, and F1 is 0 when precision + recall is 0.
inline PrfScores prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrfScores s;
  if (tp + fp > 0) s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (s.precision + s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

struct LabelStats {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  PrfScores scores;

  friend bool operator==(const LabelStats&, const LabelStats&) = default;
};

struct EvalCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t gold = 0;
  std::size_t predicted = 0;

  friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

struct EvalReport {
  std::map<std::string, LabelStats> per_label;
  PrfScores micro;
  /// Unweighted mean of per-label F1 over labels that occur in gold.
  double macro_f1 = 0.0;
  EvalCounts counts;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct ErrorBreakdown {
  std::size_t boundary_errors = 0;
  std::size_t type_errors = 0;
  std::size_t spurious = 0;
  std::size_t missed = 0;

  friend bool operator==(const ErrorBreakdown&, const ErrorBreakdown&) = default;
};

namespace detail {

struct SentencePair {
  std::vector<LabeledSpan> gold;
  std::vector<LabeledSpan> predicted;
};

inline std::vector<SentencePair> aligned_spans(const Dataset& gold, const Dataset& predicted) {
  auto mismatch = [](const std::string& what) { throw Error(ErrorKind::DatasetMismatch, what); };
  if (gold.documents.size() != predicted.documents.size()) mismatch("document counts differ");
  std::vector<SentencePair> out;
  for (std::size_t d = 0; d < gold.documents.size(); ++d) {
    const auto& gd = gold.documents[d];
    const auto& pd = predicted.documents[d];
    if (gd.sentences.size() != pd.sentences.size()) mismatch("sentence counts differ in document " + gd.paper_id);
    for (std::size_t s = 0; s < gd.sentences.size(); ++s) {
      const auto& gs = gd.sentences[s];
      const auto& ps = pd.sentences[s];
      if (gs.size() != ps.size()) mismatch("token counts differ in document " + gd.paper_id);
      for (std::size_t t = 0; t < gs.size(); ++t) {
        if (gs.tokens[t].text != ps.tokens[t].text) {
          mismatch("token " + std::to_string(t) + " of sentence " + std::to_string(s) + " in document " +
                   gd.paper_id + " differs");
        }
      }
      if (!gs.tagged() || !ps.tagged()) {
        throw Error(ErrorKind::MissingTags, "untagged sentence in document " + gd.paper_id);
      }
      out.push_back({tags_to_spans(*gs.tags), tags_to_spans(*ps.tags)});
    }
  }
  return out;
}

}  // namespace detail

inline EvalReport evaluate(const Dataset& gold, const Dataset& predicted) {
  EvalReport report;
  std::set<std::string> gold_labels;
  for (const auto& pair : detail::aligned_spans(gold, predicted)) {
    std::set<LabeledSpan> gold_set(pair.gold.begin(), pair.gold.end());
    std::set<LabeledSpan> matched;
    for (const auto& span : pair.predicted) {
      auto& stats = report.per_label[span.label];
      if (gold_set.contains(span)) {
        ++stats.tp;
        matched.insert(span);
      } else {
        ++stats.fp;
      }
    }
    for (const auto& span : pair.gold) {
      gold_labels.insert(span.label);
      if (!matched.contains(span)) ++report.per_label[span.label].fn;
    }
    report.counts.gold += pair.gold.size();
    report.counts.predicted += pair.predicted.size();
  }
  double f1_sum = 0.0;
  for (auto& [label, stats] : report.per_label) {
    stats.scores = prf(stats.tp, stats.fp, stats.fn);
    report.counts.tp += stats.tp;
    report.counts.fp += stats.fp;
    report.counts.fn += stats.fn;
    if (gold_labels.contains(label)) f1_sum += stats.scores.f1;
  }
  report.micro = prf(report.counts.tp, report.counts.fp, report.counts.fn);
  if (!gold_labels.empty()) report.macro_f1 = f1_sum / static_cast<double>(gold_labels.size());
  return report;
}

/// Non-matching predictions are classified with fixed precedence:
/// type error (same offsets, other label), then boundary error (same label,
/// overlapping offsets), otherwise spurious. Gold spans that no prediction
/// overlaps at all are missed.
inline ErrorBreakdown error_breakdown(const Dataset& gold, const Dataset& predicted) {
  ErrorBreakdown out;
  auto overlaps = [](const LabeledSpan& a, const LabeledSpan& b) { return a.start < b.end && b.start < a.end; };
  for (const auto& pair : detail::aligned_spans(gold, predicted)) {
    std::set<LabeledSpan> gold_set(pair.gold.begin(), pair.gold.end());
    for (const auto& p : pair.predicted) {
      if (gold_set.contains(p)) continue;
      bool type = false;
      bool boundary = false;
      for (const auto& g : pair.gold) {
        type = type || (g.start == p.start && g.end == p.end);
        boundary = boundary || (g.label == p.label && overlaps(g, p));
      }
      if (type) ++out.type_errors;
      else if (boundary) ++out.boundary_errors;
      else ++out.spurious;
    }
    for (const auto& g : pair.gold) {
      bool touched = std::any_of(pair.predicted.begin(), pair.predicted.end(),
                                 [&](const LabeledSpan& p) { return overlaps(g, p); });
      if (!touched) ++out.missed;
    }
  }
  return out;
}

inline nlohmann::json report_to_json(const EvalReport& report) {
  auto scores = [](const PrfScores& s) {
    return nlohmann::json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  };
  nlohmann::json per_label = nlohmann::json::object();
  for (const auto& [label, st] : report.per_label) {
    auto entry = scores(st.scores);
    entry["tp"] = st.tp;
    entry["fp"] = st.fp;
    entry["fn"] = st.fn;
    per_label[label] = std::move(entry);
  }
  return nlohmann::json{
      {"per_label", std::move(per_label)},
      {"micro", scores(report.micro)},
      {"macro_f1", report.macro_f1},
      {"counts",
       {{"tp", report.counts.tp},
        {"fp", report.counts.fp},
        {"fn", report.counts.fn},
        {"gold", report.counts.gold},
        {"predicted", report.counts.predicted}}},
  };
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  auto scores = [](const nlohmann::json& s) {
    return PrfScores{s.at("precision").get<double>(), s.at("recall").get<double>(), s.at("f1").get<double>()};
  };
  EvalReport report;
  for (const auto& [label, entry] : j.at("per_label").items()) {
    report.per_label[label] = LabelStats{entry.at("tp").get<std::size_t>(), entry.at("fp").get<std::size_t>(),
                                         entry.at("fn").get<std::size_t>(), scores(entry)};
  }
  report.micro = scores(j.at("micro"));
  report.macro_f1 = j.at("macro_f1").get<double>();
  const auto& c = j.at("counts");
  report.counts = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("fn").get<std::size_t>(),
                   c.at("gold").get<std::size_t>(), c.at("predicted").get<std::size_t>()};
  return report;
}

/// Fraction in [0, 1] as a percentage with two decimals ("92.78").
inline std::string format_percent(double fraction, int decimals = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, 100.0 * fraction);
  return buf;
}

enum class ReportFormat { Text, Json };

/// Fixed-width table: one row per label, then micro and macro rows. With no
/// labels only the header is printed.
inline std::string render_report(const EvalReport& report, ReportFormat format = ReportFormat::Text) {
  if (format == ReportFormat::Json) return report_to_json(report).dump(2) + "\n";
  std::size_t width = 12;
  for (const auto& [label, _] : report.per_label) width = std::max(width, label.size());
  std::string out;
  char buf[256];
  auto row = [&](const std::string& name, const std::string& tp, const std::string& fp, const std::string& fn,
                 const std::string& p, const std::string& r, const std::string& f) {
    std::snprintf(buf, sizeof buf, "%-*s %7s %7s %7s %9s %9s %9s\n", static_cast<int>(width), name.c_str(),
                  tp.c_str(), fp.c_str(), fn.c_str(), p.c_str(), r.c_str(), f.c_str());
    out += buf;
  };
  row("label", "tp", "fp", "fn", "precision", "recall", "f1");
  if (report.per_label.empty()) return out;
  for (const auto& [label, st] : report.per_label) {
    row(label, std::to_string(st.tp), std::to_string(st.fp), std::to_string(st.fn),
        format_percent(st.scores.precision), format_percent(st.scores.recall), format_percent(st.scores.f1));
  }
  row("micro", std::to_string(report.counts.tp), std::to_string(report.counts.fp), std::to_string(report.counts.fn),
      format_percent(report.micro.precision), format_percent(report.micro.recall), format_percent(report.micro.f1));
  row("macro", "", "", "", "", "", format_percent(report.macro_f1));
  return out;
}

}  // namespace clinner

#endif  // CLINNER_EVAL_HPP
