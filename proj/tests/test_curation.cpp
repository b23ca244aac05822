// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "support.hpp"

namespace clinner {
namespace {

using testing::Rng;

Dataset ten_tokens(const TagSequence& tags) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < tags.size(); ++i) words.push_back("w" + std::to_string(i));
  Dataset ds;
  ds.documents.push_back(document_from_tokens("P", {words}, {tags}));
  return ds;
}

TEST(Agreement, IdenticalAnnotations) {
  auto a = ten_tokens({"B-Symptom", "I-Symptom", "O", "B-Test", "O"});
  AnnotatorSet set{{"a", a}, {"b", a}, {"c", a}};
  EXPECT_EQ(simple_agreement(set, AgreementUnit::Token).unanimity, 1.0);
  EXPECT_EQ(simple_agreement(set, AgreementUnit::Span).unanimity, 1.0);
}

TEST(Agreement, EightOfTenTokens) {
  TagSequence t(10, "O");
  auto u = t;
  u[2] = "B-Symptom";
  u[7] = "B-Test";
  AnnotatorSet set{{"a", ten_tokens(t)}, {"b", ten_tokens(u)}};
  auto r = simple_agreement(set);
  EXPECT_EQ(r.unit, AgreementUnit::Token);
  EXPECT_EQ(r.unanimity, 0.8);
  EXPECT_EQ(r.pairwise_value("a", "b"), 0.8);
  EXPECT_EQ(r.pairwise_value("b", "a"), 0.8);
}

TEST(Agreement, UnanimityNeedsEveryAnnotator) {
  TagSequence t(4, "O");
  auto u = t;
  u[0] = "B-Test";
  AnnotatorSet set{{"a", ten_tokens(t)}, {"b", ten_tokens(t)}, {"c", ten_tokens(u)}};
  auto r = simple_agreement(set);
  EXPECT_EQ(r.unanimity, 0.75);
  EXPECT_EQ(r.pairwise_value("a", "b"), 1.0);
  EXPECT_EQ(r.pairwise_value("a", "c"), 0.75);
}

TEST(Agreement, SpanUnitIsIntersectionOverUnion) {
  auto a = ten_tokens({"B-Symptom", "I-Symptom", "O", "B-Test", "O"});
  auto b = ten_tokens({"B-Symptom", "I-Symptom", "O", "B-Test", "I-Test"});
  AnnotatorSet set{{"a", a}, {"b", b}};
  EXPECT_NEAR(simple_agreement(set, AgreementUnit::Span).unanimity, 1.0 / 3.0, 1e-15);
  auto empty = ten_tokens({"O", "O"});
  EXPECT_EQ(simple_agreement({{"a", empty}, {"b", empty}}, AgreementUnit::Span).unanimity, 1.0);
}

TEST(Agreement, Errors) {
  auto a = ten_tokens({"O", "O"});
  try {
    simple_agreement({{"a", a}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
  auto b = ten_tokens({"O", "O", "O"});
  try {
    simple_agreement({{"a", a}, {"b", b}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CorpusMismatch);
  }
  auto c = a;
  c.documents[0].sentences[0].tokens[0].text = "zz";
  EXPECT_THROW(simple_agreement({{"a", a}, {"c", c}}), Error);
}

TEST(Agreement, BoundsAndSymmetry) {
  Rng rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    auto base = testing::random_dataset(rng, {3, 3, 6});
    AnnotatorSet set{{"a", base}, {"b", testing::perturb(rng, base, 0.3)}, {"c", testing::perturb(rng, base, 0.3)}};
    for (auto unit : {AgreementUnit::Token, AgreementUnit::Span}) {
      auto r = simple_agreement(set, unit);
      double lowest = 1.0;
      for (const auto& [x, row] : r.pairwise) {
        for (const auto& [y, v] : row) {
          EXPECT_GE(v, 0.0);
          EXPECT_LE(v, 1.0);
          EXPECT_EQ(v, simple_agreement({{x, set.at(x)}, {y, set.at(y)}}, unit).unanimity);
          EXPECT_EQ(v, simple_agreement({{"1" + y, set.at(y)}, {"2" + x, set.at(x)}}, unit).unanimity);
          lowest = std::min(lowest, v);
        }
      }
      EXPECT_LE(r.unanimity, lowest);
    }
  }
}

TEST(Agreement, Json) {
  auto a = ten_tokens({"O", "B-Test"});
  auto j = agreement_to_json(simple_agreement({{"x", a}, {"y", a}}, AgreementUnit::Span));
  EXPECT_EQ(j["unit"], "span");
  EXPECT_EQ(j["unanimity"], 1.0);
  EXPECT_EQ(j["pairwise"]["x"]["y"], 1.0);
}

/// Model over {O, B-X} whose emission for B-X on token "wK" is `bias[K]`;
/// the margin of a one-token sentence "wK" is then |bias[K]|.
TaggerModel margin_model(const std::vector<double>& bias) {
  TaggerModel m;
  m.tag_list = {"O", "B-X"};
  m.transitions.assign(4, 0.0);
  m.metadata.window = 0;
  for (std::size_t k = 0; k < bias.size(); ++k) m.weights["w0=w" + std::to_string(k)] = {0.0, bias[k]};
  return m;
}

Dataset one_token_pool(const std::vector<std::pair<std::string, std::vector<std::size_t>>>& docs) {
  Dataset ds;
  for (const auto& [id, tokens] : docs) {
    std::vector<std::vector<std::string>> sentences;
    for (auto k : tokens) sentences.push_back({"w" + std::to_string(k)});
    ds.documents.push_back(document_from_tokens(id, sentences, {}));
  }
  return ds;
}

TEST(Select, HandEnumeratedMargins) {
  auto model = margin_model({0.1, 0.5});
  auto pool = one_token_pool({{"B", {0}}, {"A", {1, 0}}});
  auto batch = select_batch(model, pool, 2);
  ASSERT_EQ(batch.size(), 2u);
  EXPECT_EQ(batch[0].doc_id, "A");
  EXPECT_EQ(batch[0].sentence_index, 1u);
  EXPECT_EQ(batch[1].doc_id, "B");
  EXPECT_EQ(batch[1].sentence_index, 0u);
  EXPECT_DOUBLE_EQ(batch[0].margin, 0.1);
  EXPECT_DOUBLE_EQ(batch[0].uncertainty, 1.0 / 1.1);
}

TEST(Select, KZeroAndKLarge) {
  auto model = margin_model({0.1, 0.5, 0.3});
  auto pool = one_token_pool({{"A", {0, 1}}, {"B", {2}}});
  EXPECT_TRUE(select_batch(model, pool, 0).empty());
  auto all = select_batch(model, pool, 10);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].margin, 0.1);
  EXPECT_EQ(all[2].margin, 0.5);
}

TEST(Select, SinglePathHasZeroUncertainty) {
  TaggerModel m;
  m.tag_list = {"O"};
  m.transitions = {0.0};
  auto batch = select_batch(m, one_token_pool({{"A", {0}}}), 1);
  ASSERT_EQ(batch.size(), 1u);
  EXPECT_EQ(batch[0].uncertainty, 0.0);
  EXPECT_TRUE(std::isinf(batch[0].margin));
  auto j = selection_to_json(batch);
  EXPECT_EQ(j[0]["uncertainty"], 0.0);
  EXPECT_EQ(j[0]["doc_id"], "A");
}

TEST(Select, UncertaintyDecreasesWithMargin) {
  double prev = margin_uncertainty(0.0);
  EXPECT_EQ(prev, 1.0);
  for (double m : {1e-9, 0.1, 0.5, 1.0, 10.0, 1e9}) {
    EXPECT_LT(margin_uncertainty(m), prev);
    prev = margin_uncertainty(m);
  }
}

TEST(Select, MatchesEnumeratedOrder) {
  Rng rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    Dataset pool;
    std::vector<Sentence> all_sentences;
    for (std::size_t d = 0, nd = testing::pick(rng, 1, 3); d < nd; ++d) {
      std::vector<std::vector<std::string>> sentences;
      for (std::size_t s = 0, ns = testing::pick(rng, 1, 3); s < ns; ++s) {
        std::vector<std::string> words;
        for (std::size_t t = 0, nt = testing::pick(rng, 1, 4); t < nt; ++t) words.push_back(testing::random_word(rng));
        sentences.push_back(words);
      }
      pool.documents.push_back(document_from_tokens("D" + std::to_string(testing::pick(rng, 0, 99)) + "-" +
                                                         std::to_string(d),
                                                     sentences, {}));
      for (const auto& s : pool.documents.back().sentences) all_sentences.push_back(s);
    }
    auto model = testing::random_model(rng, all_sentences, 4, trial % 2 == 0);
    std::vector<std::tuple<double, std::string, std::size_t>> expect;
    for (const auto& doc : pool.documents) {
      for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
        auto scores = testing::sorted_scores(
            testing::enumerate_paths(testing::oracle_lattice(model, doc.sentences[s]), model.tag_list));
        double margin = scores.size() < 2 ? std::numeric_limits<double>::infinity()
                                          : (scores[0] - scores[1]) / static_cast<double>(doc.sentences[s].size());
        expect.emplace_back(margin, doc.paper_id, s);
      }
    }
    std::sort(expect.begin(), expect.end());
    std::size_t k = testing::pick(rng, 0, expect.size() + 1);
    auto batch = select_batch(model, pool, k);
    ASSERT_EQ(batch.size(), std::min(k, expect.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      EXPECT_EQ(batch[i].doc_id, std::get<1>(expect[i]));
      EXPECT_EQ(batch[i].sentence_index, std::get<2>(expect[i]));
      EXPECT_EQ(batch[i].margin, std::get<0>(expect[i]));
      if (i > 0) {
        EXPECT_LE(batch[i].uncertainty, batch[i - 1].uncertainty);
      }
    }
    EXPECT_EQ(select_batch(model, pool, k), batch);
  }
}

}  // namespace
}  // namespace clinner
