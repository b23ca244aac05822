// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_JSONL_HPP
#define CLINNER_JSONL_HPP

#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "clinner/corpus.hpp"
#include "clinner/error.hpp"
#include "clinner/text.hpp"

namespace clinner {

/// One JSON object per line with string fields "paper_id" and "text".
/// Other keys (for example "language") are accepted and ignored. Documents
/// are segmented and tokenized but left untagged.
inline Dataset load_jsonl_corpus(std::istream& in, const LabelRegistry& registry = default_registry()) {
  Dataset dataset{{}, registry};
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    text::require_utf8(line, line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedRecord, e.what(), line_no);
    }
    if (!record.is_object() || !record.contains("paper_id") || !record["paper_id"].is_string() ||
        !record.contains("text") || !record["text"].is_string()) {
      throw Error(ErrorKind::MalformedRecord, "expected string fields paper_id and text", line_no);
    }
    auto paper_id = record["paper_id"].get<std::string>();
    if (paper_id.empty()) throw Error(ErrorKind::MalformedRecord, "empty paper_id", line_no);
    if (!seen.insert(paper_id).second) {
      throw Error(ErrorKind::DuplicatePaperId, "paper_id '" + paper_id + "' repeated", line_no);
    }
    dataset.documents.push_back(make_document(std::move(paper_id), record["text"].get<std::string>()));
  }
  if (in.bad()) throw Error(ErrorKind::IoError, "read failure");
  return dataset;
}

inline void save_jsonl_corpus(const Dataset& dataset, std::ostream& out) {
  for (const auto& doc : dataset.documents) {
    nlohmann::json record{{"paper_id", doc.paper_id}, {"text", doc.text}};
    out << record.dump() << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "write failure");
}

}  // namespace clinner

#endif  // CLINNER_JSONL_HPP
