// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_CONLL_HPP
#define CLINNER_CONLL_HPP

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "clinner/corpus.hpp"
#include "clinner/error.hpp"
#include "clinner/scheme.hpp"
#include "clinner/text.hpp"

// CoNLL-2003 reader and writer. The reader accepts 2-4 whitespace separated
// columns (token first, NER tag last); the writer always emits two.
namespace clinner {

enum class SchemeMode {
  Strict,  // dangling I- tags raise SchemeViolation
  Repair,  // dangling I- tags are rewritten to B- and reported
};

struct ConllOptions {
  SchemeMode mode = SchemeMode::Repair;
};

struct SchemeIssue {
  std::size_t line = 0;
  std::string tag;
};

struct ConllReadReport {
  std::size_t repaired_sentences = 0;
  std::vector<SchemeIssue> issues;
};

inline std::string conll_document_id(std::size_t index) {
  std::string n = std::to_string(index + 1);
  if (n.size() < 4) n.insert(0, 4 - n.size(), '0');
  return "doc-" + n;
}

inline Dataset parse_conll(std::istream& in, const LabelRegistry& registry, const ConllOptions& options = {},
                           ConllReadReport* report = nullptr) {
  Dataset dataset{{}, registry};
  std::vector<std::vector<std::string>> doc_tokens;
  std::vector<std::optional<TagSequence>> doc_tags;
  std::vector<std::string> words;
  TagSequence tags;
  std::vector<std::size_t> lines;
  bool doc_open = false;

  auto close_sentence = [&]() {
    if (words.empty()) return;
    auto violations = validate_tags(tags, registry);
    if (!violations.empty()) {
      if (options.mode == SchemeMode::Strict) {
        const auto& v = violations.front();
        throw Error(ErrorKind::SchemeViolation, std::string(violation_name(v.kind)) + " '" + v.tag + "'",
                    lines[v.index]);
      }
      if (report) {
        ++report->repaired_sentences;
        for (const auto& v : violations) report->issues.push_back({lines[v.index], v.tag});
      }
      tags = repair_tags(tags, registry);
    }
    doc_tokens.push_back(std::move(words));
    doc_tags.emplace_back(std::move(tags));
    words.clear();
    tags.clear();
    lines.clear();
  };
  auto close_document = [&]() {
    close_sentence();
    if (doc_open) {
      dataset.documents.push_back(
          document_from_tokens(conll_document_id(dataset.documents.size()), doc_tokens, doc_tags));
    }
    doc_tokens.clear();
    doc_tags.clear();
    doc_open = false;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    text::require_utf8(line, line_no);
    auto columns = text::split_whitespace(line);
    if (columns.empty()) {
      close_sentence();
      continue;
    }
    if (columns.front() == "-DOCSTART-") {
      close_document();
      doc_open = true;
      continue;
    }
    if (columns.size() < 2 || columns.size() > 4) {
      throw Error(ErrorKind::MalformedLine,
                  "expected 2-4 columns, found " + std::to_string(columns.size()), line_no);
    }
    std::string tag(columns.back());
    auto parsed = parse_tag(tag);
    if (!parsed) throw Error(ErrorKind::MalformedLine, "malformed tag '" + tag + "'", line_no);
    if (parsed->prefix != TagPrefix::Outside && !registry.contains(parsed->label)) {
      throw Error(ErrorKind::UnknownLabel, "label '" + std::string(parsed->label) + "' not in registry", line_no);
    }
    doc_open = true;
    words.emplace_back(columns.front());
    tags.push_back(std::move(tag));
    lines.push_back(line_no);
  }
  if (in.bad()) throw Error(ErrorKind::IoError, "read failure");
  close_document();
  return dataset;
}

/// One "-DOCSTART- O" line and a blank line per document, then one
/// "<token> <tag>" line per token with a blank line after each sentence.
inline void write_conll(const Dataset& dataset, std::ostream& out) {
  require_tagged(dataset);
  std::string buffer;
  for (const auto& doc : dataset.documents) {
    buffer += "-DOCSTART- O\n\n";
    for (const auto& sentence : doc.sentences) {
      if (sentence.tags->size() != sentence.tokens.size()) {
        throw Error(ErrorKind::LengthMismatch, "document '" + doc.paper_id + "' has a sentence with " +
                                                   std::to_string(sentence.tokens.size()) + " tokens but " +
                                                   std::to_string(sentence.tags->size()) + " tags");
      }
      for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
        buffer += sentence.tokens[i].text;
        buffer += ' ';
        buffer += (*sentence.tags)[i];
        buffer += '\n';
      }
      buffer += '\n';
    }
    out << buffer;
    buffer.clear();
  }
  if (!out) throw Error(ErrorKind::IoError, "write failure");
}

}  // namespace clinner

#endif  // CLINNER_CONLL_HPP
