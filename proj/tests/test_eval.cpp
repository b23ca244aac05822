// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "support.hpp"

namespace clinner {
namespace {

using testing::Rng;

/// One document, one sentence of `n` tokens with the given spans.
Dataset single(std::size_t n, const std::vector<LabeledSpan>& spans) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n; ++i) words.push_back("t" + std::to_string(i));
  Dataset ds;
  ds.documents.push_back(document_from_tokens("P", {words}, {spans_to_tags(spans, n)}));
  return ds;
}

TEST(Evaluate, Identity) {
  auto g = single(5, {{0, 2, "Symptom"}, {3, 4, "Test"}});
  auto r = evaluate(g, g);
  EXPECT_EQ(r.micro.f1, 1.0);
  EXPECT_EQ(r.macro_f1, 1.0);
  for (const auto& [label, st] : r.per_label) EXPECT_EQ(st.scores.f1, 1.0) << label;
}

TEST(Evaluate, WorkedExample) {
  auto r = evaluate(single(6, {{0, 2, "Symptom"}, {3, 4, "Test"}}), single(6, {{0, 2, "Symptom"}, {3, 5, "Test"}}));
  EXPECT_EQ(r.counts.tp, 1u);
  EXPECT_EQ(r.counts.fp, 1u);
  EXPECT_EQ(r.counts.fn, 1u);
  EXPECT_EQ(r.micro.precision, 0.5);
  EXPECT_EQ(r.micro.recall, 0.5);
  EXPECT_EQ(r.micro.f1, 0.5);
  EXPECT_EQ(r.per_label.at("Symptom").scores.f1, 1.0);
  EXPECT_EQ(r.per_label.at("Test").scores.f1, 0.0);
  EXPECT_EQ(r.macro_f1, 0.5);
}

TEST(Evaluate, EmptyPrediction) {
  auto r = evaluate(single(4, {{0, 2, "Symptom"}}), single(4, {}));
  EXPECT_EQ(r.micro.precision, 0.0);
  EXPECT_EQ(r.micro.recall, 0.0);
  EXPECT_EQ(r.micro.f1, 0.0);
  auto none = evaluate(single(4, {}), single(4, {}));
  EXPECT_EQ(none.micro.f1, 0.0);
  EXPECT_TRUE(none.per_label.empty());
  EXPECT_EQ(none.macro_f1, 0.0);
}

TEST(Evaluate, MacroIgnoresLabelsAbsentFromGold) {
  auto r = evaluate(single(4, {{0, 1, "Symptom"}}), single(4, {{0, 1, "Symptom"}, {2, 3, "Test"}}));
  EXPECT_EQ(r.per_label.at("Test").fp, 1u);
  EXPECT_EQ(r.macro_f1, 1.0);
}

TEST(Evaluate, Mismatch) {
  auto expect_kind = [](const Dataset& g, const Dataset& p, ErrorKind k) {
    try {
      evaluate(g, p);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), k);
    }
  };
  expect_kind(single(4, {}), single(5, {}), ErrorKind::DatasetMismatch);
  expect_kind(single(4, {}), Dataset{}, ErrorKind::DatasetMismatch);
  auto untagged = single(4, {});
  untagged.documents[0].sentences[0].tags.reset();
  expect_kind(single(4, {}), untagged, ErrorKind::MissingTags);
  auto renamed = single(4, {});
  renamed.documents[0].sentences[0].tokens[1].text = "other";
  expect_kind(single(4, {}), renamed, ErrorKind::DatasetMismatch);
}

TEST(Evaluate, MatchesSetOracle) {
  Rng rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    auto g = testing::random_dataset(rng, {2, 5, 8});
    auto p = testing::perturb(rng, g, 0.3);
    auto r = evaluate(g, p);
    auto o = testing::oracle_evaluate(g, p);
    EXPECT_EQ(r.counts.tp, o.micro.tp);
    EXPECT_EQ(r.counts.fp, o.micro.fp);
    EXPECT_EQ(r.counts.fn, o.micro.fn);
    EXPECT_NEAR(r.micro.f1, o.micro.f1, 1e-12);
    EXPECT_NEAR(r.macro_f1, o.macro_f1, 1e-12);
    ASSERT_EQ(r.per_label.size(), o.per_label.size());
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& [label, st] : r.per_label) {
      const auto& os = o.per_label.at(label);
      EXPECT_EQ(std::tie(st.tp, st.fp, st.fn), std::tie(os.tp, os.fp, os.fn));
      EXPECT_NEAR(st.scores.f1, os.f1, 1e-12);
      tp += st.tp;
      fp += st.fp;
      fn += st.fn;
    }
    EXPECT_EQ(std::tie(tp, fp, fn), std::tie(r.counts.tp, r.counts.fp, r.counts.fn));
    EXPECT_EQ(r.counts.tp + r.counts.fn, r.counts.gold);
    EXPECT_EQ(r.counts.tp + r.counts.fp, r.counts.predicted);
  }
}

TEST(Evaluate, Bounds) {
  Rng rng(43);
  for (int trial = 0; trial < 300; ++trial) {
    auto g = testing::random_dataset(rng, {2, 4, 8});
    auto r = evaluate(g, testing::perturb(rng, g, 0.5));
    auto check = [](const PrfScores& s) {
      for (double v : {s.precision, s.recall, s.f1}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      if (s.precision > 0 && s.recall > 0) {
        EXPECT_LE(s.f1, std::max(s.precision, s.recall) + 1e-15);
        EXPECT_GE(s.f1, std::min(s.precision, s.recall) - 1e-15);
      }
    };
    check(r.micro);
    for (const auto& [_, st] : r.per_label) check(st.scores);
  }
}

TEST(Evaluate, RemovingFalsePositiveNeverLowersPrecision) {
  Rng rng(47);
  for (int trial = 0; trial < 300; ++trial) {
    auto g = testing::random_dataset(rng, {1, 3, 8});
    auto p = testing::perturb(rng, g, 0.5);
    auto before = evaluate(g, p);
    bool removed = false;
    for (auto& doc : p.documents) {
      for (std::size_t s = 0; s < doc.sentences.size() && !removed; ++s) {
        auto gold_spans = tags_to_spans(*g.documents[&doc - p.documents.data()].sentences[s].tags);
        auto spans = tags_to_spans(*doc.sentences[s].tags);
        for (std::size_t i = 0; i < spans.size(); ++i) {
          if (std::find(gold_spans.begin(), gold_spans.end(), spans[i]) != gold_spans.end()) continue;
          spans.erase(spans.begin() + static_cast<std::ptrdiff_t>(i));
          doc.sentences[s].tags = spans_to_tags(spans, doc.sentences[s].size());
          removed = true;
          break;
        }
      }
    }
    if (!removed) continue;
    EXPECT_GE(evaluate(g, p).micro.precision, before.micro.precision);
  }
}

TEST(Breakdown, Categories) {
  auto b = error_breakdown(single(4, {{0, 2, "Symptom"}}), single(4, {{0, 2, "Test"}}));
  EXPECT_EQ(b.type_errors, 1u);
  EXPECT_EQ(b.boundary_errors + b.spurious + b.missed, 0u);
  b = error_breakdown(single(4, {{0, 2, "Symptom"}}), single(4, {{0, 3, "Symptom"}}));
  EXPECT_EQ(b.boundary_errors, 1u);
  EXPECT_EQ(b.type_errors + b.spurious + b.missed, 0u);
  b = error_breakdown(single(4, {}), single(4, {{0, 1, "Test"}}));
  EXPECT_EQ(b.spurious, 1u);
  b = error_breakdown(single(4, {{2, 4, "Test"}}), single(4, {}));
  EXPECT_EQ(b.missed, 1u);
  b = error_breakdown(single(4, {{0, 2, "Symptom"}}), single(4, {{1, 3, "Test"}}));
  EXPECT_EQ(b.spurious, 1u);
  EXPECT_EQ(b.missed, 0u);
}

TEST(Breakdown, PartitionsFalsePositives) {
  Rng rng(53);
  for (int trial = 0; trial < 300; ++trial) {
    auto g = testing::random_dataset(rng, {2, 3, 8});
    auto p = testing::perturb(rng, g, 0.4);
    auto b = error_breakdown(g, p);
    auto r = evaluate(g, p);
    EXPECT_EQ(b.type_errors + b.boundary_errors + b.spurious, r.counts.fp);
    EXPECT_LE(b.missed, r.counts.fn);
  }
}

TEST(Render, PercentFormat) {
  EXPECT_EQ(format_percent(0.9278), "92.78");
  EXPECT_EQ(format_percent(1.0), "100.00");
  EXPECT_EQ(format_percent(2.0 / 3.0), "66.67");
}

TEST(Render, HeaderOnlyWhenEmpty) {
  auto text = render_report(EvalReport{});
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_NE(text.find("precision"), std::string::npos);
}

TEST(Render, TableRows) {
  auto r = evaluate(single(6, {{0, 2, "Symptom"}, {3, 4, "Test"}}), single(6, {{0, 2, "Symptom"}, {3, 5, "Test"}}));
  auto text = render_report(r);
  EXPECT_NE(text.find("Symptom"), std::string::npos);
  EXPECT_NE(text.find("micro"), std::string::npos);
  EXPECT_NE(text.find("50.00"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(Render, JsonRoundTrip) {
  Rng rng(59);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = testing::random_dataset(rng);
    auto r = evaluate(g, testing::perturb(rng, g, 0.3));
    auto back = report_from_json(nlohmann::json::parse(render_report(r, ReportFormat::Json)));
    EXPECT_EQ(report_to_json(back), report_to_json(r));
  }
}

}  // namespace
}  // namespace clinner
