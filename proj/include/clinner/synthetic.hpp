// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_SYNTHETIC_HPP
#define CLINNER_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clinner/corpus.hpp"
#include "clinner/gazetteer.hpp"
#include "clinner/ingest.hpp"

// Deterministic case-report-like text for desk-scale experiments. Gold tags
// come from the gazetteer, so the label is a fixed function of the tokens.
namespace clinner {

inline const std::map<std::string, std::vector<std::string>>& default_gazetteer_terms() {
  static const std::map<std::string, std::vector<std::string>> terms{
      {"Symptom",
       {"fever", "cough", "shortness of breath", "fatigue", "headache", "sore throat", "loss of taste",
        "loss of smell", "diarrhea", "myalgia", "chills", "nausea", "rhinorrhea"}},
      {"Test", {"RT-PCR", "antigen test", "antibody test", "chest CT", "saliva test", "D-dimer"}},
      {"Disease_Syndrome_Disorder",
       {"ARDS", "pneumonia", "myocarditis", "thrombosis", "acute kidney injury", "COVID-19", "pulmonary embolism",
        "sepsis"}},
      {"Drug_Ingredient", {"remdesivir", "dexamethasone", "heparin", "tocilizumab"}},
  };
  return terms;
}

struct SynthSpec {
  std::size_t documents = 40;
  std::size_t sentences_per_document = 5;
  std::uint64_t seed = 42;
};

namespace detail {

class SentenceFactory {
 public:
  SentenceFactory(const Gazetteer& gazetteer, std::uint64_t seed) : rng_(seed) {
    for (const auto& [label, list] : gazetteer.terms()) pools_[label] = list;
  }

  std::string sentence() {
    static const std::vector<std::string> templates{
        "The patient presented with {S} and {S}.",
        "On admission {T} was positive.",
        "A {N}-year-old woman was admitted with {S}.",
        "{T} confirmed {D}.",
        "She developed {D} on day {N} of illness.",
        "He was treated with {M} for {D}.",
        "Chest imaging showed {D}.",
        "Symptoms included {S}, {S} and {S}.",
        "{S} resolved after {N} days.",
        "The {T} result was negative.",
        "Laboratory findings were otherwise unremarkable.",
        "There was no history of weight loss.",
        "Follow-up {T} showed improvement.",
        "{M} was started empirically.",
        "Complications included {D} and {D}.",
        "The course was complicated by {D} despite {M}.",
    };
    std::string out = expand(templates[pick(templates.size())]);
    if (!out.empty() && text::is_lower(out[0])) out[0] = static_cast<char>(out[0] - 'a' + 'A');
    return out;
  }

  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

 private:
  std::string expand(const std::string& tpl) {
    std::string out;
    for (std::size_t i = 0; i < tpl.size(); ++i) {
      if (tpl[i] == '{' && i + 2 < tpl.size() && tpl[i + 2] == '}') {
        out += fill(tpl[i + 1]);
        i += 2;
      } else {
        out += tpl[i];
      }
    }
    return out;
  }

  std::string fill(char slot) {
    const char* label = nullptr;
    switch (slot) {
      case 'S': label = "Symptom"; break;
      case 'T': label = "Test"; break;
      case 'D': label = "Disease_Syndrome_Disorder"; break;
      case 'M': label = "Drug_Ingredient"; break;
      default: return std::to_string(2 + pick(80));
    }
    const auto& pool = pools_.at(label);
    return pool[pick(pool.size())];
  }

  std::mt19937_64 rng_;
  std::map<std::string, std::vector<std::string>> pools_;
};

}  // namespace detail

/// Documents of `sentences_per_document` generated sentences, tagged by the
/// gazetteer. Paper ids are SYN0001, SYN0002, ...
inline Dataset make_synthetic_corpus(const Gazetteer& gazetteer, const SynthSpec& spec,
                                     const LabelRegistry& registry = default_registry()) {
  detail::SentenceFactory factory(gazetteer, spec.seed);
  Dataset dataset{{}, registry};
  for (std::size_t d = 0; d < spec.documents; ++d) {
    std::string body;
    for (std::size_t s = 0; s < spec.sentences_per_document; ++s) {
      if (s > 0) body += ' ';
      body += factory.sentence();
    }
    char id[16];
    std::snprintf(id, sizeof id, "SYN%04zu", d + 1);
    dataset.documents.push_back(make_document(id, std::move(body)));
  }
  return gazetteer.annotate(dataset);
}

/// Publication records for offline fixtures. Besides regular English case
/// reports the stream contains non-English records, excluded publication
/// types, records outside 2022-03-01..2022-06-30 and repeated ids, so every
/// harvest filter has something to remove.
inline std::vector<PublicationRecord> make_synthetic_records(const Gazetteer& gazetteer, std::size_t count,
                                                             std::uint64_t seed) {
  detail::SentenceFactory factory(gazetteer, seed);
  std::vector<PublicationRecord> out;
  for (std::size_t i = 0; i < count; ++i) {
    PublicationRecord r;
    r.paper_id = std::to_string(35000000 + i * 7);
    r.title = "Case report: " + factory.sentence();
    std::string abstract;
    const std::size_t n = 3 + factory.pick(4);
    for (std::size_t s = 0; s < n; ++s) abstract += (s ? " " : "") + factory.sentence();
    r.abstract_text = abstract;
    r.language = "eng";
    r.pub_type = "Case Reports";
    r.date = parse_date("2022-03-01");
    r.date = Date{std::chrono::sys_days{r.date} + std::chrono::days{static_cast<int>(factory.pick(122))}};
    switch (i % 10) {
      case 3: r.language = "fre"; break;
      case 5: r.pub_type = "Preprint"; break;
      case 7: r.date = parse_date("2021-11-15"); break;
      case 8: r.pub_type = "Clinical Trial"; break;
      default: break;
    }
    if (i % 13 == 12) out.push_back(r);
    out.push_back(std::move(r));
  }
  return out;
}

/// One fixture page in the wire schema.
inline std::string fixture_page(const std::vector<PublicationRecord>& records, std::size_t total) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& r : records) {
    results.push_back({{"paper_id", r.paper_id},
                       {"title", r.title},
                       {"abstract", r.abstract_text},
                       {"language", r.language},
                       {"pub_type", r.pub_type},
                       {"date", format_date(r.date)}});
  }
  return nlohmann::json{{"total", total}, {"results", std::move(results)}}.dump(1) + "\n";
}

}  // namespace clinner

#endif  // CLINNER_SYNTHETIC_HPP
