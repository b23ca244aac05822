// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_CORPUS_HPP
#define CLINNER_CORPUS_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "clinner/error.hpp"
#include "clinner/scheme.hpp"
#include "clinner/text.hpp"

namespace clinner {

/// A token and its byte range [char_start, char_end) in the owning
/// document's text.
struct Token {
  std::string text;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::optional<TagSequence> tags;

  bool tagged() const noexcept { return tags.has_value(); }
  std::size_t size() const noexcept { return tokens.size(); }

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Document {
  std::string paper_id;
  std::string text;
  std::vector<Sentence> sentences;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Dataset {
  std::vector<Document> documents;
  LabelRegistry registry = default_registry();

  std::size_t sentence_count() const noexcept {
    std::size_t n = 0;
    for (const auto& doc : documents) n += doc.sentences.size();
    return n;
  }
  std::size_t token_count() const noexcept {
    std::size_t n = 0;
    for (const auto& doc : documents)
      for (const auto& s : doc.sentences) n += s.size();
    return n;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct TextRange {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const TextRange&, const TextRange&) = default;
};

namespace detail {

inline bool sentence_break_after(std::string_view text, std::size_t i) {
  char c = text[i];
  if (c != '.' && c != '!' && c != '?') return false;
  if (i + 1 >= text.size() || !text::is_space(text[i + 1])) return false;
  std::size_t j = i + 1;
  while (j < text.size() && text::is_space(text[j])) ++j;
  return j < text.size() && (text::is_upper(text[j]) || text::is_digit(text[j]));
}

}  // namespace detail

/// Sentence boundaries: after '.', '!' or '?' followed by whitespace and an
/// uppercase ASCII letter or a digit. Segments are trimmed of whitespace.
inline std::vector<TextRange> segment_sentences(std::string_view text) {
  std::vector<TextRange> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto piece = text::trim(text.substr(start, end - start));
    if (!piece.empty()) {
      auto b = static_cast<std::size_t>(piece.data() - text.data());
      out.push_back({b, b + piece.size()});
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (detail::sentence_break_after(text, i)) {
      emit(i + 1);
      start = i + 1;
    }
  }
  emit(text.size());
  return out;
}

/// Whitespace split, then leading and trailing ASCII punctuation peeled off
/// one character at a time. Offsets are relative to `sentence_text` plus
/// `base_offset`.
inline std::vector<Token> tokenize(std::string_view sentence_text, std::size_t base_offset = 0) {
  std::vector<Token> out;
  auto push = [&](std::size_t b, std::size_t e) {
    out.push_back({std::string(sentence_text.substr(b, e - b)), base_offset + b, base_offset + e});
  };
  for (auto word : text::split_whitespace(sentence_text)) {
    auto b = static_cast<std::size_t>(word.data() - sentence_text.data());
    auto e = b + word.size();
    while (b < e && text::is_punct(sentence_text[b])) {
      push(b, b + 1);
      ++b;
    }
    std::size_t core_end = e;
    while (core_end > b && text::is_punct(sentence_text[core_end - 1])) --core_end;
    if (core_end > b) push(b, core_end);
    for (std::size_t i = core_end; i < e; ++i) push(i, i + 1);
  }
  return out;
}

/// Segments and tokenizes `text` into an untagged document.
inline Document make_document(std::string paper_id, std::string text) {
  Document doc{std::move(paper_id), std::move(text), {}};
  for (auto range : segment_sentences(doc.text)) {
    std::string_view piece(doc.text.data() + range.start, range.end - range.start);
    doc.sentences.push_back({tokenize(piece, range.start), std::nullopt});
  }
  return doc;
}

/// Builds a document from pre-tokenized sentences: tokens joined by one
/// space, sentences by a newline.
inline Document document_from_tokens(std::string paper_id,
                                     const std::vector<std::vector<std::string>>& sentences,
                                     const std::vector<std::optional<TagSequence>>& tags) {
  Document doc{std::move(paper_id), {}, {}};
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (s > 0) doc.text += '\n';
    Sentence sentence;
    for (std::size_t t = 0; t < sentences[s].size(); ++t) {
      if (t > 0) doc.text += ' ';
      std::size_t b = doc.text.size();
      doc.text += sentences[s][t];
      sentence.tokens.push_back({sentences[s][t], b, doc.text.size()});
    }
    if (s < tags.size()) sentence.tags = tags[s];
    doc.sentences.push_back(std::move(sentence));
  }
  return doc;
}

inline void require_tagged(const Dataset& dataset, ErrorKind kind = ErrorKind::MissingTags) {
  for (const auto& doc : dataset.documents) {
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      if (!doc.sentences[s].tagged()) {
        throw Error(kind, "document '" + doc.paper_id + "' sentence " + std::to_string(s) + " has no tags");
      }
    }
  }
}

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 42;
};

namespace detail {

/// Fisher-Yates driven directly by mt19937_64 so results do not depend on
/// the standard library's distribution implementations.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace detail

/// Document-level split. The train side receives floor(fraction * N)
/// documents; both sides keep the input's document order.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "train_fraction must lie in (0, 1)");
  }
  const std::size_t n = dataset.documents.size();
  if (n == 0) throw Error(ErrorKind::EmptyDataset, "cannot split an empty dataset");
  // The epsilon absorbs representation error such as 0.7 * 10 = 6.999...
  auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n) + 1e-9));
  if (n_train == 0 || n_train == n) {
    throw Error(ErrorKind::DegenerateSplit, "fraction " + std::to_string(spec.train_fraction) + " of " +
                                                std::to_string(n) + " documents leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(spec.seed);
  detail::seeded_shuffle(order, rng);
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  Dataset train{{}, dataset.registry};
  Dataset test{{}, dataset.registry};
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? train : test).documents.push_back(dataset.documents[i]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace clinner

#endif  // CLINNER_CORPUS_HPP
