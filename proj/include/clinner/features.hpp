// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_FEATURES_HPP
#define CLINNER_FEATURES_HPP

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "clinner/corpus.hpp"
#include "clinner/error.hpp"
#include "clinner/text.hpp"

namespace clinner {

/// Binary feature set for one token position; names are sorted and unique.
struct FeatureVector {
  std::vector<std::string> names;

  bool contains(std::string_view name) const {
    return std::binary_search(names.begin(), names.end(), name);
  }
};

inline constexpr std::string_view kLeftBoundary = "<s>";
inline constexpr std::string_view kRightBoundary = "</s>";

/// Letters map to x/X, digits to d, everything else is kept.
inline std::string word_shape(std::string_view word) {
  std::string shape(word);
  for (char& c : shape) {
    if (text::is_upper(c)) c = 'X';
    else if (text::is_lower(c)) c = 'x';
    else if (text::is_digit(c)) c = 'd';
  }
  return shape;
}

inline bool is_all_digits(std::string_view word) {
  return !word.empty() && std::all_of(word.begin(), word.end(), [](char c) { return text::is_digit(c); });
}

/// Leading uppercase letter and no uppercase letter after it.
inline bool is_titlecase(std::string_view word) {
  if (word.empty() || !text::is_upper(word.front())) return false;
  return std::none_of(word.begin() + 1, word.end(), [](char c) { return text::is_upper(c); });
}

/// Window features for `position`: lowercased word and shape at every offset
/// in [-window, window] (boundary markers outside the sentence), plus
/// prefixes/suffixes of length 1-3 and digit/titlecase flags of the focus
/// token. Affixes are taken in code points.
inline FeatureVector extract_features(const Sentence& sentence, std::size_t position, std::size_t window) {
  const std::size_t n = sentence.tokens.size();
  if (position >= n) {
    throw Error(ErrorKind::PositionOutOfRange,
                "position " + std::to_string(position) + " outside sentence of length " + std::to_string(n));
  }
  FeatureVector fv;
  auto add = [&](std::string name) { fv.names.push_back(std::move(name)); };
  const auto w = static_cast<long long>(window);
  for (long long o = -w; o <= w; ++o) {
    const long long at = static_cast<long long>(position) + o;
    const std::string off = std::to_string(o);
    if (at < 0 || at >= static_cast<long long>(n)) {
      auto marker = std::string(at < 0 ? kLeftBoundary : kRightBoundary);
      add("w" + off + "=" + marker);
      add("shape" + off + "=" + marker);
      continue;
    }
    const auto& word = sentence.tokens[static_cast<std::size_t>(at)].text;
    add("w" + off + "=" + text::to_lower(word));
    add("shape" + off + "=" + word_shape(word));
  }
  const auto& focus = sentence.tokens[position].text;
  auto cps = text::code_points(focus);
  for (std::size_t len = 1; len <= 3 && len <= cps.size(); ++len) {
    std::string pre;
    std::string suf;
    for (std::size_t i = 0; i < len; ++i) {
      pre += cps[i];
      suf += cps[cps.size() - len + i];
    }
    add("pre" + std::to_string(len) + "=" + pre);
    add("suf" + std::to_string(len) + "=" + suf);
  }
  add(std::string("isdigit=") + (is_all_digits(focus) ? "true" : "false"));
  add(std::string("title=") + (is_titlecase(focus) ? "true" : "false"));
  std::sort(fv.names.begin(), fv.names.end());
  fv.names.erase(std::unique(fv.names.begin(), fv.names.end()), fv.names.end());
  return fv;
}

}  // namespace clinner

#endif  // CLINNER_FEATURES_HPP
