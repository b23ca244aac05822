// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

// Random generators and brute-force oracles shared by the unit suites and
// the acceptance binary. Oracles deliberately avoid the library's own
// helpers where the helper is the thing under test.

#ifndef CLINNER_TESTS_SUPPORT_HPP
#define CLINNER_TESTS_SUPPORT_HPP

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "clinner/clinner.hpp"

namespace clinner::testing {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

inline const std::vector<std::string>& sample_labels() {
  static const std::vector<std::string> labels = {"Symptom", "Test", "Disease_Syndrome_Disorder"};
  return labels;
}

/// Non-empty token text without whitespace. Mixes ASCII punctuation,
/// digits and multi-byte UTF-8.
inline std::string random_word(Rng& rng) {
  static const std::vector<std::string> pieces = {"a", "b", "q", "Z", "x", "7", "0", "-", "/", ".", ",", "(",
                                                  ")", "%", "é", "µ", "α", "型", "Fever", "PCR", "COVID-19"};
  std::string w;
  for (std::size_t i = 0, n = pick(rng, 1, 4); i < n; ++i) w += pieces[pick(rng, 0, pieces.size() - 1)];
  if (w == "-DOCSTART-") w += "x";
  return w;
}

/// Valid IOB2 sequence built left to right: I-X only ever continues X.
inline TagSequence random_valid_tags(Rng& rng, std::size_t n, const std::vector<std::string>& labels) {
  TagSequence tags;
  std::string open;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = pick(rng, 0, 2);
    if (r == 2 && !open.empty()) {
      tags.push_back("I-" + open);
    } else if (r == 1) {
      open = labels[pick(rng, 0, labels.size() - 1)];
      tags.push_back("B-" + open);
    } else {
      open.clear();
      tags.push_back("O");
    }
  }
  return tags;
}

/// Arbitrary sequence over {O, B-X, I-X}; may violate IOB2.
inline TagSequence random_any_tags(Rng& rng, std::size_t n, const std::vector<std::string>& labels) {
  TagSequence tags;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = pick(rng, 0, 2);
    const auto& l = labels[pick(rng, 0, labels.size() - 1)];
    tags.push_back(r == 0 ? std::string("O") : (r == 1 ? "B-" : "I-") + l);
  }
  return tags;
}

/// Sorted, non-overlapping spans inside [0, n).
inline std::vector<LabeledSpan> random_spans(Rng& rng, std::size_t n, const std::vector<std::string>& labels) {
  std::vector<LabeledSpan> spans;
  std::size_t i = 0;
  while (i < n) {
    if (coin(rng, 0.4)) {
      std::size_t len = pick(rng, 1, std::min<std::size_t>(3, n - i));
      spans.push_back({i, i + len, labels[pick(rng, 0, labels.size() - 1)]});
      i += len;
    } else {
      ++i;
    }
  }
  return spans;
}

struct DatasetShape {
  std::size_t max_docs = 4;
  std::size_t max_sentences = 4;
  std::size_t max_tokens = 8;
};

/// Tagged dataset with CoNLL-style document ids so a parse round trip can
/// be compared with ==.
inline Dataset random_dataset(Rng& rng, const DatasetShape& shape = {},
                              const std::vector<std::string>& labels = sample_labels()) {
  Dataset ds;
  for (std::size_t d = 0, nd = pick(rng, 0, shape.max_docs); d < nd; ++d) {
    std::vector<std::vector<std::string>> sentences;
    std::vector<std::optional<TagSequence>> tags;
    for (std::size_t s = 0, ns = pick(rng, 1, shape.max_sentences); s < ns; ++s) {
      std::size_t n = pick(rng, 1, shape.max_tokens);
      std::vector<std::string> words;
      for (std::size_t t = 0; t < n; ++t) words.push_back(random_word(rng));
      sentences.push_back(std::move(words));
      tags.push_back(random_valid_tags(rng, n, labels));
    }
    ds.documents.push_back(document_from_tokens(conll_document_id(d), sentences, tags));
  }
  return ds;
}

/// Same corpus as `base`, tags redrawn.
inline Dataset retag(Rng& rng, const Dataset& base, const std::vector<std::string>& labels = sample_labels()) {
  Dataset out = base;
  for (auto& doc : out.documents)
    for (auto& s : doc.sentences) s.tags = random_valid_tags(rng, s.size(), labels);
  return out;
}

/// Copy of `base` where each tag is independently resampled with probability p,
/// then repaired into IOB2.
inline Dataset perturb(Rng& rng, const Dataset& base, double p,
                       const std::vector<std::string>& labels = sample_labels()) {
  Dataset out = base;
  for (auto& doc : out.documents) {
    for (auto& s : doc.sentences) {
      auto noise = random_any_tags(rng, s.size(), labels);
      for (std::size_t i = 0; i < s.size(); ++i)
        if (coin(rng, p)) (*s.tags)[i] = noise[i];
      s.tags = repair_tags(*s.tags, out.registry);
    }
  }
  return out;
}

inline std::string to_conll(const Dataset& d) {
  std::ostringstream os;
  write_conll(d, os);
  return os.str();
}

inline Dataset from_conll(const std::string& text, const LabelRegistry& registry = default_registry()) {
  std::istringstream is(text);
  return parse_conll(is, registry);
}

// ---------------------------------------------------------------- spans ---

/// Spans read directly off tags: a span opens at B-X and extends over I-X.
inline std::vector<std::tuple<std::size_t, std::size_t, std::string>> oracle_spans(const TagSequence& tags) {
  std::vector<std::tuple<std::size_t, std::size_t, std::string>> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].rfind("B-", 0) != 0) continue;
    std::string label = tags[i].substr(2);
    std::size_t j = i + 1;
    while (j < tags.size() && tags[j] == "I-" + label) ++j;
    out.emplace_back(i, j, label);
  }
  return out;
}

// ------------------------------------------------------------- metrics ---

struct OracleScores {
  std::size_t tp = 0, fp = 0, fn = 0;
  double p = 0, r = 0, f1 = 0;
};

inline OracleScores oracle_scores(std::size_t tp, std::size_t fp, std::size_t fn) {
  OracleScores s{tp, fp, fn};
  s.p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  s.r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.f1 = s.p + s.r == 0 ? 0.0 : 2 * s.p * s.r / (s.p + s.r);
  return s;
}

struct OracleReport {
  std::map<std::string, OracleScores> per_label;
  OracleScores micro;
  double macro_f1 = 0;
};

/// Materializes (doc, sentence, start, end, label) sets and intersects them.
inline OracleReport oracle_evaluate(const Dataset& gold, const Dataset& pred) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, std::string>;
  std::set<Key> g, p;
  for (std::size_t d = 0; d < gold.documents.size(); ++d) {
    for (std::size_t s = 0; s < gold.documents[d].sentences.size(); ++s) {
      for (auto& [a, b, l] : oracle_spans(*gold.documents[d].sentences[s].tags)) g.insert({d, s, a, b, l});
      for (auto& [a, b, l] : oracle_spans(*pred.documents[d].sentences[s].tags)) p.insert({d, s, a, b, l});
    }
  }
  std::set<Key> both;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::inserter(both, both.end()));
  std::set<std::string> labels;
  for (const auto& k : g) labels.insert(std::get<4>(k));
  for (const auto& k : p) labels.insert(std::get<4>(k));
  OracleReport out;
  auto count = [](const std::set<Key>& s, const std::string& l) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](const Key& k) { return std::get<4>(k) == l; }));
  };
  double macro_sum = 0;
  std::size_t macro_n = 0;
  for (const auto& l : labels) {
    std::size_t tp = count(both, l);
    out.per_label[l] = oracle_scores(tp, count(p, l) - tp, count(g, l) - tp);
    if (count(g, l) > 0) {
      macro_sum += out.per_label[l].f1;
      ++macro_n;
    }
  }
  out.micro = oracle_scores(both.size(), p.size() - both.size(), g.size() - both.size());
  out.macro_f1 = macro_n == 0 ? 0.0 : macro_sum / static_cast<double>(macro_n);
  return out;
}

// ------------------------------------------------------------- decoding ---

struct Enumerated {
  std::vector<std::size_t> path;
  double score;
};

inline bool oracle_admissible(const std::vector<std::string>& tag_list, const std::vector<std::size_t>& path) {
  for (std::size_t t = 0; t < path.size(); ++t) {
    const auto& tag = tag_list[path[t]];
    if (tag.rfind("I-", 0) != 0) continue;
    if (t == 0) return false;
    const auto& prev = tag_list[path[t - 1]];
    if (prev == "O" || prev.substr(2) != tag.substr(2)) return false;
  }
  return true;
}

/// Every admissible path with its score, accumulated left to right as
/// (score + transition) + emission.
inline std::vector<Enumerated> enumerate_paths(const ScoreLattice& lattice, const std::vector<std::string>& tag_list) {
  std::vector<Enumerated> out;
  const std::size_t n = lattice.n_tags, len = lattice.length;
  std::vector<std::size_t> path(len, 0);
  while (true) {
    if (oracle_admissible(tag_list, path)) {
      double s = lattice.emissions[path[0]];
      for (std::size_t t = 1; t < len; ++t) {
        s = s + lattice.transitions[path[t - 1] * n + path[t]];
        s = s + lattice.emissions[t * n + path[t]];
      }
      out.push_back({path, s});
    }
    std::size_t t = 0;
    while (t < len && ++path[t] == n) path[t++] = 0;
    if (t == len) break;
  }
  return out;
}

/// Highest score; among ties the path that is smallest when compared from
/// the last position backwards (the decoder's tag-order rule).
inline Enumerated oracle_best(const std::vector<Enumerated>& all) {
  const Enumerated* best = &all.front();
  for (const auto& e : all) {
    if (e.score > best->score) {
      best = &e;
    } else if (e.score == best->score &&
               std::lexicographical_compare(e.path.rbegin(), e.path.rend(), best->path.rbegin(), best->path.rend())) {
      best = &e;
    }
  }
  return *best;
}

inline std::vector<double> sorted_scores(const std::vector<Enumerated>& all) {
  std::vector<double> s;
  for (const auto& e : all) s.push_back(e.score);
  std::sort(s.rbegin(), s.rend());
  return s;
}

/// Emissions computed straight from the weight table.
inline ScoreLattice oracle_lattice(const TaggerModel& model, const Sentence& sentence) {
  ScoreLattice l;
  l.length = sentence.size();
  l.n_tags = model.n_tags();
  l.transitions = model.transitions;
  l.emissions.assign(l.length * l.n_tags, 0.0);
  for (std::size_t t = 0; t < l.length; ++t) {
    auto names = extract_features(sentence, t, model.metadata.window).names;
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
      auto it = model.weights.find(name);
      if (it == model.weights.end()) continue;
      for (std::size_t y = 0; y < l.n_tags; ++y) l.emissions[t * l.n_tags + y] += it->second[y];
    }
  }
  return l;
}

inline Sentence plain_sentence(const std::vector<std::string>& words) {
  return document_from_tokens("s", {words}, {}).sentences.front();
}

/// Small random model over a tag list drawn from {O, B-X, I-X, B-Y, I-Y}
/// with at most `max_tags` tags. Integer weights make exact ties common.
inline TaggerModel random_model(Rng& rng, const std::vector<Sentence>& sentences, std::size_t max_tags = 4,
                                bool integer_weights = false) {
  static const std::vector<std::string> pool = {"O", "B-X", "I-X", "B-Y", "I-Y"};
  TaggerModel m;
  do {
    m.tag_list.clear();
    for (const auto& t : pool)
      if (coin(rng)) m.tag_list.push_back(t);
    if (m.tag_list.size() > max_tags) m.tag_list.resize(max_tags);
  } while (m.tag_list.empty() ||
           std::all_of(m.tag_list.begin(), m.tag_list.end(), [](const std::string& t) { return t.rfind("I-", 0) == 0; }));
  const std::size_t n = m.tag_list.size();
  m.metadata.window = pick(rng, 0, 1);
  auto draw = [&] {
    return integer_weights ? static_cast<double>(static_cast<int>(pick(rng, 0, 4)) - 2)
                           : std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
  };
  m.transitions.resize(n * n);
  for (auto& w : m.transitions) w = draw();
  for (const auto& s : sentences) {
    for (std::size_t t = 0; t < s.size(); ++t) {
      for (const auto& name : extract_features(s, t, m.metadata.window).names) {
        if (m.weights.contains(name) || !coin(rng, 0.3)) continue;
        std::vector<double> row(n);
        for (auto& w : row) w = draw();
        m.weights[name] = row;
      }
    }
  }
  return m;
}

// ------------------------------------------------------------ filesystem ---

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("clinner-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path source_dir() { return CLINNER_SOURCE_DIR; }

}  // namespace clinner::testing

#endif  // CLINNER_TESTS_SUPPORT_HPP
