// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_ANALYTICS_HPP
#define CLINNER_ANALYTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "clinner/corpus.hpp"
#include "clinner/error.hpp"
#include "clinner/scheme.hpp"
#include "clinner/text.hpp"

// Document-level aggregation of tagged entities. One document stands for
// one case report, so "percent of patients" is reported as percent of
// documents.
namespace clinner {

class MentionNormalizer {
 public:
  MentionNormalizer() = default;

  /// `synonyms` maps surface forms to canonical terms. Every canonical term
  /// also maps to itself, which makes normalize() idempotent; a canonical
  /// term that is a surface form of a different canonical is rejected.
  explicit MentionNormalizer(const std::map<std::string, std::string>& synonyms, bool case_fold = true)
      : case_fold_(case_fold) {
    for (const auto& [surface, canonical] : synonyms) {
      auto key = key_of(surface);
      auto value = text::collapse_whitespace(canonical);
      if (key.empty() || value.empty()) throw Error(ErrorKind::ConfigError, "empty synonym entry");
      auto [it, inserted] = map_.emplace(key, value);
      if (!inserted && it->second != value) {
        throw Error(ErrorKind::ConfigError, "surface form '" + surface + "' maps to two canonical terms");
      }
    }
    std::vector<std::pair<std::string, std::string>> self;
    for (const auto& [_, canonical] : map_) self.emplace_back(key_of(canonical), canonical);
    for (auto& [key, canonical] : self) {
      auto [it, inserted] = map_.emplace(key, canonical);
      if (!inserted && it->second != canonical) {
        throw Error(ErrorKind::ConfigError, "canonical term '" + canonical + "' is also a synonym of '" +
                                                it->second + "'");
      }
    }
  }

  std::string normalize(std::string_view surface) const {
    auto key = key_of(surface);
    auto it = map_.find(key);
    return it == map_.end() ? key : it->second;
  }

  bool case_fold() const noexcept { return case_fold_; }

 private:
  std::string key_of(std::string_view s) const {
    auto collapsed = text::collapse_whitespace(s);
    return case_fold_ ? text::to_lower(collapsed) : collapsed;
  }

  bool case_fold_ = true;
  std::unordered_map<std::string, std::string> map_;
};

/// Synonym config: a JSON object {"surface": "canonical", ...}.
inline MentionNormalizer load_normalizer(std::istream& in, bool case_fold = true) {
  try {
    auto j = nlohmann::json::parse(in);
    return MentionNormalizer(j.get<std::map<std::string, std::string>>(), case_fold);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("synonym config: ") + e.what());
  }
}

/// Common COVID-19 symptom surface forms grouped under the symptom names
/// reported in case-report surveillance.
inline const std::map<std::string, std::string>& default_symptom_synonyms() {
  static const std::map<std::string, std::string> map{
      {"fever", "fever or chills"},
      {"fevers", "fever or chills"},
      {"chills", "fever or chills"},
      {"pyrexia", "fever or chills"},
      {"cough", "cough"},
      {"dry cough", "cough"},
      {"coughing", "cough"},
      {"shortness of breath", "shortness of breath"},
      {"dyspnea", "shortness of breath"},
      {"dyspnoea", "shortness of breath"},
      {"breathlessness", "shortness of breath"},
      {"difficulty breathing", "shortness of breath"},
      {"fatigue", "fatigue"},
      {"tiredness", "fatigue"},
      {"myalgia", "muscle or body aches"},
      {"muscle aches", "muscle or body aches"},
      {"body aches", "muscle or body aches"},
      {"headache", "headache"},
      {"sore throat", "sore throat"},
      {"pharyngitis", "sore throat"},
      {"loss of taste", "new loss of taste or smell"},
      {"loss of smell", "new loss of taste or smell"},
      {"anosmia", "new loss of taste or smell"},
      {"ageusia", "new loss of taste or smell"},
      {"nausea", "nausea or vomiting"},
      {"vomiting", "nausea or vomiting"},
      {"congestion", "congestion or runny nose"},
      {"nasal congestion", "congestion or runny nose"},
      {"runny nose", "congestion or runny nose"},
      {"diarrhea", "diarrhea"},
      {"diarrhoea", "diarrhea"},
  };
  return map;
}

struct Mention {
  std::string label;
  std::string surface;
};

/// Entity mentions of one document; the surface joins the span's tokens
/// with single spaces.
inline std::vector<Mention> document_mentions(const Document& doc) {
  std::vector<Mention> out;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const auto& sentence = doc.sentences[s];
    if (!sentence.tagged()) {
      throw Error(ErrorKind::MissingTags, "document '" + doc.paper_id + "' sentence " + std::to_string(s) +
                                              " has no tags");
    }
    for (const auto& span : tags_to_spans(*sentence.tags)) {
      std::string surface;
      for (std::size_t t = span.start; t < span.end; ++t) {
        if (t > span.start) surface += ' ';
        surface += sentence.tokens[t].text;
      }
      out.push_back({span.label, std::move(surface)});
    }
  }
  return out;
}

struct FrequencyRow {
  std::string term;
  std::size_t document_count = 0;
  double percent = 0.0;

  friend bool operator==(const FrequencyRow&, const FrequencyRow&) = default;
};

struct FrequencyTable {
  std::string label;
  std::size_t total_documents = 0;
  /// percent descending, term ascending on ties; zero rows omitted
  std::vector<FrequencyRow> rows;
};

inline FrequencyTable entity_doc_frequency(const Dataset& tagged, const std::string& label,
                                           const MentionNormalizer& normalizer) {
  if (tagged.documents.empty()) throw Error(ErrorKind::EmptyDataset, "no documents to aggregate");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : tagged.documents) {
    std::set<std::string> terms;
    for (const auto& m : document_mentions(doc)) {
      if (m.label == label) terms.insert(normalizer.normalize(m.surface));
    }
    for (const auto& t : terms) ++counts[t];
  }
  FrequencyTable table{label, tagged.documents.size(), {}};
  const auto n = static_cast<double>(table.total_documents);
  for (const auto& [term, count] : counts) {
    table.rows.push_back({term, count, 100.0 * static_cast<double>(count) / n});
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const FrequencyRow& a, const FrequencyRow& b) { return a.percent > b.percent; });
  return table;
}

/// log2(((c_ab + 1) * n) / (c_a * c_b)): document co-occurrence PMI with
/// add-one smoothing on the joint count.
inline double smoothed_pmi(std::size_t c_ab, std::size_t c_a, std::size_t c_b, std::size_t n) {
  return std::log2((static_cast<double>(c_ab) + 1.0) * static_cast<double>(n) /
                   (static_cast<double>(c_a) * static_cast<double>(c_b)));
}

struct KeywordReport {
  std::string disease;
  std::vector<std::pair<std::string, double>> keywords;
};

/// Top-k terms associated with `disease_term` by document-level smoothed
/// PMI. Candidates are normalized mentions (any label) other than the
/// disease itself that co-occur with it in at least `min_count` documents.
inline KeywordReport top_keywords(const Dataset& tagged, const std::string& disease_term, std::size_t k,
                                  const MentionNormalizer& normalizer, std::size_t min_count = 2) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  const std::string disease = normalizer.normalize(disease_term);
  std::map<std::string, std::size_t> doc_freq;
  std::map<std::string, std::size_t> joint;
  std::size_t disease_docs = 0;
  for (const auto& doc : tagged.documents) {
    std::set<std::string> terms;
    for (const auto& m : document_mentions(doc)) terms.insert(normalizer.normalize(m.surface));
    const bool has_disease = terms.erase(disease) > 0;
    if (has_disease) ++disease_docs;
    for (const auto& t : terms) {
      ++doc_freq[t];
      if (has_disease) ++joint[t];
    }
  }
  if (disease_docs == 0) throw Error(ErrorKind::UnknownDisease, "'" + disease_term + "' never occurs");
  KeywordReport report{disease, {}};
  const std::size_t n = tagged.documents.size();
  for (const auto& [term, c_ab] : joint) {
    if (c_ab < min_count) continue;
    report.keywords.emplace_back(term, smoothed_pmi(c_ab, disease_docs, doc_freq[term], n));
  }
  std::stable_sort(report.keywords.begin(), report.keywords.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (report.keywords.size() > k) report.keywords.resize(k);
  return report;
}

inline nlohmann::json keywords_to_json(const KeywordReport& report) {
  nlohmann::json kw = nlohmann::json::array();
  for (const auto& [term, score] : report.keywords) kw.push_back({{"term", term}, {"score", score}});
  return nlohmann::json{{"disease", report.disease}, {"keywords", std::move(kw)}};
}

enum class ChartFormat { Csv, Ascii };

inline std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

/// CSV ("term,documents,percent_of_documents", percent with one decimal) or
/// an ASCII bar chart scaled to 40 columns at 100%.
inline std::string render_frequency_chart(const FrequencyTable& table, ChartFormat format = ChartFormat::Csv) {
  std::string out;
  if (format == ChartFormat::Csv) {
    out = "term,documents,percent_of_documents\n";
    for (const auto& row : table.rows) {
      out += row.term + "," + std::to_string(row.document_count) + "," + format_fixed(row.percent, 1) + "\n";
    }
    return out;
  }
  out = table.label + ": percent of documents (N = " + std::to_string(table.total_documents) + ")\n";
  std::size_t width = 4;
  for (const auto& row : table.rows) width = std::max(width, row.term.size());
  for (const auto& row : table.rows) {
    auto bar = static_cast<std::size_t>(std::lround(row.percent * 40.0 / 100.0));
    std::string line = row.term;
    line.append(width - row.term.size() + 1, ' ');
    line += "|";
    line.append(bar, '#');
    line.append(40 - bar, ' ');
    line += "| " + format_fixed(row.percent, 1) + "% (" + std::to_string(row.document_count) + ")\n";
    out += line;
  }
  return out;
}

}  // namespace clinner

#endif  // CLINNER_ANALYTICS_HPP
