// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_GAZETTEER_HPP
#define CLINNER_GAZETTEER_HPP

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clinner/corpus.hpp"
#include "clinner/error.hpp"
#include "clinner/scheme.hpp"
#include "clinner/text.hpp"

namespace clinner {

/// Dictionary tagger: leftmost-longest, case-insensitive match of tokenized
/// terms. Used to pre-annotate corpora and as the label function of the
/// synthetic training corpus.
class Gazetteer {
 public:
  struct Entry {
    std::vector<std::string> tokens;  // lowercased
    std::string label;
  };

  Gazetteer() = default;

  /// `terms` maps label -> surface terms. A term listed under two labels is
  /// rejected.
  Gazetteer(const std::map<std::string, std::vector<std::string>>& terms, const LabelRegistry& registry) {
    std::map<std::vector<std::string>, std::string> seen;
    for (const auto& [label, list] : terms) {
      if (!registry.contains(label)) throw Error(ErrorKind::UnknownLabel, "gazetteer label '" + label + "'");
      for (const auto& term : list) {
        std::vector<std::string> toks;
        for (const auto& tok : tokenize(term)) toks.push_back(text::to_lower(tok.text));
        if (toks.empty()) throw Error(ErrorKind::ConfigError, "empty gazetteer term under '" + label + "'");
        auto [it, inserted] = seen.emplace(toks, label);
        if (!inserted && it->second != label) {
          throw Error(ErrorKind::ConfigError, "term '" + term + "' listed under two labels");
        }
        if (inserted) entries_.push_back({std::move(toks), label});
      }
    }
    terms_ = terms;
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const std::map<std::string, std::vector<std::string>>& terms() const noexcept { return terms_; }

  TagSequence annotate(const Sentence& sentence) const {
    const std::size_t n = sentence.size();
    std::vector<std::string> lower;
    lower.reserve(n);
    for (const auto& tok : sentence.tokens) lower.push_back(text::to_lower(tok.text));
    TagSequence tags(n, "O");
    std::size_t i = 0;
    while (i < n) {
      const Entry* best = nullptr;
      for (const auto& e : entries_) {
        if (e.tokens.size() > n - i || (best && e.tokens.size() <= best->tokens.size())) continue;
        if (std::equal(e.tokens.begin(), e.tokens.end(), lower.begin() + static_cast<std::ptrdiff_t>(i))) best = &e;
      }
      if (!best) {
        ++i;
        continue;
      }
      tags[i] = "B-" + best->label;
      for (std::size_t k = 1; k < best->tokens.size(); ++k) tags[i + k] = "I-" + best->label;
      i += best->tokens.size();
    }
    return tags;
  }

  Dataset annotate(const Dataset& dataset) const {
    Dataset out = dataset;
    for (auto& doc : out.documents)
      for (auto& sentence : doc.sentences) sentence.tags = annotate(sentence);
    return out;
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::vector<std::string>> terms_;
};

/// Gazetteer file: {"<label>": ["term", ...], ...}.
inline Gazetteer load_gazetteer(std::istream& in, const LabelRegistry& registry) {
  try {
    auto j = nlohmann::json::parse(in);
    return Gazetteer(j.get<std::map<std::string, std::vector<std::string>>>(), registry);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("gazetteer: ") + e.what());
  }
}

}  // namespace clinner

#endif  // CLINNER_GAZETTEER_HPP
