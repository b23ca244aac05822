// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_TAGGER_HPP
#define CLINNER_TAGGER_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "clinner/conll.hpp"
#include "clinner/corpus.hpp"
#include "clinner/decode.hpp"
#include "clinner/error.hpp"
#include "clinner/features.hpp"
#include "clinner/scheme.hpp"

// Native sequence tagger: a structured perceptron over window features with
// masked Viterbi decoding. Also hosts the adapter that attaches predictions
// produced by an external model.
namespace clinner {

struct TaggerConfig {
  std::size_t epochs = 10;
  std::uint64_t seed = 42;
  bool averaging = true;
  std::size_t window = 2;
};

struct TaggerMetadata {
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  std::string registry_digest;
  bool averaging = true;
  std::size_t window = 2;

  friend bool operator==(const TaggerMetadata&, const TaggerMetadata&) = default;
};

/// "O", then "B-<label>" and "I-<label>" for each label in registry order.
inline std::vector<std::string> tag_list_for(const LabelRegistry& registry) {
  std::vector<std::string> tags{"O"};
  for (const auto& label : registry.labels()) {
    tags.push_back("B-" + label);
    tags.push_back("I-" + label);
  }
  return tags;
}

struct TaggerModel {
  std::vector<std::string> tag_list;
  /// feature name -> one weight per entry of tag_list
  std::unordered_map<std::string, std::vector<double>> weights;
  /// row-major [prev][next] over tag_list
  std::vector<double> transitions;
  TaggerMetadata metadata;

  std::size_t n_tags() const noexcept { return tag_list.size(); }

  /// Untrained model: all weights zero.
  static TaggerModel zero(const LabelRegistry& registry, std::size_t window = 2) {
    TaggerModel model;
    model.tag_list = tag_list_for(registry);
    model.transitions.assign(model.n_tags() * model.n_tags(), 0.0);
    model.metadata.registry_digest = registry.digest();
    model.metadata.window = window;
    return model;
  }

  std::size_t tag_index(std::string_view tag) const {
    for (std::size_t i = 0; i < tag_list.size(); ++i) {
      if (tag_list[i] == tag) return i;
    }
    throw Error(ErrorKind::InvalidModel, "tag '" + std::string(tag) + "' not in model tag list");
  }
};

/// Emission and transition scores of `sentence` under `model`. Emissions sum
/// feature weights in sorted feature-name order.
inline ScoreLattice build_lattice(const TaggerModel& model, const Sentence& sentence) {
  ScoreLattice lattice;
  lattice.length = sentence.size();
  lattice.n_tags = model.n_tags();
  lattice.transitions = model.transitions;
  lattice.emissions.assign(lattice.length * lattice.n_tags, 0.0);
  for (std::size_t t = 0; t < lattice.length; ++t) {
    auto fv = extract_features(sentence, t, model.metadata.window);
    for (const auto& name : fv.names) {
      auto it = model.weights.find(name);
      if (it == model.weights.end()) continue;
      for (std::size_t y = 0; y < lattice.n_tags; ++y) lattice.emissions[t * lattice.n_tags + y] += it->second[y];
    }
  }
  return lattice;
}

inline TagSequence path_to_tags(const TaggerModel& model, const std::vector<std::size_t>& path) {
  TagSequence tags;
  tags.reserve(path.size());
  for (auto y : path) tags.push_back(model.tag_list[y]);
  return tags;
}

inline TagSequence viterbi_decode(const TaggerModel& model, const Sentence& sentence) {
  if (sentence.tokens.empty()) throw Error(ErrorKind::EmptySentence, "cannot decode an empty sentence");
  TransitionMask mask(model.tag_list);
  return path_to_tags(model, viterbi(build_lattice(model, sentence), mask).tags);
}

inline std::vector<std::pair<TagSequence, double>> kbest_decode(const TaggerModel& model, const Sentence& sentence,
                                                                std::size_t k) {
  if (sentence.tokens.empty()) throw Error(ErrorKind::EmptySentence, "cannot decode an empty sentence");
  TransitionMask mask(model.tag_list);
  std::vector<std::pair<TagSequence, double>> out;
  for (auto& path : kbest(build_lattice(model, sentence), mask, k)) {
    out.emplace_back(path_to_tags(model, path.tags), path.score);
  }
  return out;
}

namespace detail {

/// Dense weights indexed by interned feature id, with the running sums
/// needed for averaging.
class PerceptronState {
 public:
  explicit PerceptronState(std::size_t n_tags) : n_(n_tags), trans_(n_tags * n_tags, 0.0), trans_acc_(trans_) {}

  std::size_t intern(const std::string& name) {
    auto [it, inserted] = ids_.emplace(name, names_.size());
    if (inserted) {
      names_.push_back(name);
      weights_.resize(weights_.size() + n_, 0.0);
      acc_.resize(acc_.size() + n_, 0.0);
    }
    return it->second;
  }

  ScoreLattice lattice(const std::vector<std::vector<std::size_t>>& features) const {
    ScoreLattice lat;
    lat.length = features.size();
    lat.n_tags = n_;
    lat.transitions = trans_;
    lat.emissions.assign(lat.length * n_, 0.0);
    for (std::size_t t = 0; t < features.size(); ++t) {
      for (auto f : features[t]) {
        for (std::size_t y = 0; y < n_; ++y) lat.emissions[t * n_ + y] += weights_[f * n_ + y];
      }
    }
    return lat;
  }

  /// Adds phi(gold) - phi(pred) at instance `step` (1-based).
  void update(const std::vector<std::vector<std::size_t>>& features, const std::vector<std::size_t>& gold,
              const std::vector<std::size_t>& pred, std::size_t step) {
    const double scale = static_cast<double>(step - 1);
    auto bump = [&](std::vector<double>& w, std::vector<double>& acc, std::size_t idx, double d) {
      w[idx] += d;
      acc[idx] += scale * d;
    };
    for (std::size_t t = 0; t < gold.size(); ++t) {
      if (gold[t] != pred[t]) {
        for (auto f : features[t]) {
          bump(weights_, acc_, f * n_ + gold[t], 1.0);
          bump(weights_, acc_, f * n_ + pred[t], -1.0);
        }
      }
      if (t > 0 && (gold[t - 1] != pred[t - 1] || gold[t] != pred[t])) {
        bump(trans_, trans_acc_, gold[t - 1] * n_ + gold[t], 1.0);
        bump(trans_, trans_acc_, pred[t - 1] * n_ + pred[t], -1.0);
      }
    }
  }

  /// Final weights: w, or the average w - acc / steps over all instances.
  void export_to(TaggerModel& model, bool averaging, std::size_t steps) const {
    auto value = [&](double w, double acc) {
      if (!averaging || steps == 0) return w;
      return w - acc / static_cast<double>(steps);
    };
    model.transitions.assign(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_ * n_; ++i) model.transitions[i] = value(trans_[i], trans_acc_[i]) + 0.0;
    model.weights.clear();
    for (std::size_t f = 0; f < names_.size(); ++f) {
      std::vector<double> row(n_, 0.0);
      bool any = false;
      for (std::size_t y = 0; y < n_; ++y) {
        row[y] = value(weights_[f * n_ + y], acc_[f * n_ + y]) + 0.0;
        any = any || row[y] != 0.0;
      }
      if (any) model.weights.emplace(names_[f], std::move(row));
    }
  }

 private:
  std::size_t n_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> names_;
  std::vector<double> weights_;
  std::vector<double> acc_;
  std::vector<double> trans_;
  std::vector<double> trans_acc_;
};

}  // namespace detail

/// Structured perceptron. Each epoch visits the sentences in an order
/// shuffled by `config.seed`; a sentence whose decode differs from gold
/// triggers an update by phi(gold) - phi(predicted).
inline TaggerModel train(const Dataset& dataset, const TaggerConfig& config) {
  if (config.epochs < 1) throw Error(ErrorKind::InvalidArgument, "epochs must be at least 1");
  require_tagged(dataset, ErrorKind::UntaggedSentence);

  TaggerModel model = TaggerModel::zero(dataset.registry, config.window);
  model.metadata.seed = config.seed;
  model.metadata.epochs = config.epochs;
  model.metadata.averaging = config.averaging;
  TransitionMask mask(model.tag_list);
  std::unordered_map<std::string, std::size_t> tag_ids;
  for (std::size_t i = 0; i < model.tag_list.size(); ++i) tag_ids.emplace(model.tag_list[i], i);

  detail::PerceptronState state(model.n_tags());
  struct Instance {
    std::vector<std::vector<std::size_t>> features;
    std::vector<std::size_t> gold;
  };
  std::vector<Instance> instances;
  for (const auto& doc : dataset.documents) {
    for (const auto& sentence : doc.sentences) {
      if (sentence.tokens.empty()) continue;
      if (auto v = validate_tags(*sentence.tags, dataset.registry); !v.empty()) {
        throw Error(ErrorKind::InvalidScheme, "document '" + doc.paper_id + "' has an invalid tag '" +
                                                  v.front().tag + "'");
      }
      Instance inst;
      for (std::size_t t = 0; t < sentence.size(); ++t) {
        std::vector<std::size_t> ids;
        for (const auto& name : extract_features(sentence, t, config.window).names) ids.push_back(state.intern(name));
        inst.features.push_back(std::move(ids));
        inst.gold.push_back(tag_ids.at((*sentence.tags)[t]));
      }
      instances.push_back(std::move(inst));
    }
  }
  if (instances.empty()) throw Error(ErrorKind::EmptyDataset, "no sentences to train on");

  std::vector<std::size_t> order(instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(config.seed);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    detail::seeded_shuffle(order, rng);
    for (auto idx : order) {
      ++step;
      const auto& inst = instances[idx];
      auto pred = viterbi(state.lattice(inst.features), mask).tags;
      if (pred != inst.gold) state.update(inst.features, inst.gold, pred, step);
    }
  }
  state.export_to(model, config.averaging, step);
  return model;
}

/// Canonical JSON (sorted keys, compact, trailing newline).
inline std::string serialize_model(const TaggerModel& model) {
  nlohmann::json weights = nlohmann::json::object();
  for (const auto& [feature, row] : model.weights) {
    nlohmann::json entry = nlohmann::json::object();
    for (std::size_t y = 0; y < row.size(); ++y) {
      if (row[y] != 0.0) entry[model.tag_list[y]] = row[y];
    }
    if (!entry.empty()) weights[feature] = std::move(entry);
  }
  nlohmann::json transitions = nlohmann::json::array();
  for (std::size_t p = 0; p < model.n_tags(); ++p) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t y = 0; y < model.n_tags(); ++y) row.push_back(model.transitions[p * model.n_tags() + y]);
    transitions.push_back(std::move(row));
  }
  nlohmann::json doc{
      {"format", "clinner-tagger/1"},
      {"metadata",
       {{"averaging", model.metadata.averaging},
        {"epochs", model.metadata.epochs},
        {"registry_digest", model.metadata.registry_digest},
        {"seed", model.metadata.seed},
        {"window", model.metadata.window}}},
      {"tag_list", model.tag_list},
      {"transitions", std::move(transitions)},
      {"weights", std::move(weights)},
  };
  return doc.dump() + "\n";
}

inline void save_model(const TaggerModel& model, std::ostream& out) {
  out << serialize_model(model);
  if (!out) throw Error(ErrorKind::IoError, "write failure");
}

inline TaggerModel load_model(std::istream& in) {
  TaggerModel model;
  try {
    auto doc = nlohmann::json::parse(in);
    if (doc.value("format", "") != "clinner-tagger/1") throw Error(ErrorKind::InvalidModel, "unknown model format");
    const auto& meta = doc.at("metadata");
    model.metadata.averaging = meta.at("averaging").get<bool>();
    model.metadata.epochs = meta.at("epochs").get<std::size_t>();
    model.metadata.registry_digest = meta.at("registry_digest").get<std::string>();
    model.metadata.seed = meta.at("seed").get<std::uint64_t>();
    model.metadata.window = meta.at("window").get<std::size_t>();
    model.tag_list = doc.at("tag_list").get<std::vector<std::string>>();
    const std::size_t n = model.n_tags();
    if (n == 0) throw Error(ErrorKind::InvalidModel, "empty tag list");
    std::unordered_map<std::string, std::size_t> ids;
    for (std::size_t i = 0; i < n; ++i) {
      if (!ids.emplace(model.tag_list[i], i).second) throw Error(ErrorKind::InvalidModel, "duplicate tag");
    }
    TransitionMask check(model.tag_list);
    const auto& rows = doc.at("transitions");
    if (!rows.is_array() || rows.size() != n) throw Error(ErrorKind::InvalidModel, "transition matrix shape");
    model.transitions.reserve(n * n);
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != n) throw Error(ErrorKind::InvalidModel, "transition matrix shape");
      for (const auto& v : row) model.transitions.push_back(v.get<double>());
    }
    for (const auto& [feature, entry] : doc.at("weights").items()) {
      std::vector<double> row(n, 0.0);
      for (const auto& [tag, v] : entry.items()) {
        auto it = ids.find(tag);
        if (it == ids.end()) throw Error(ErrorKind::InvalidModel, "weight for unknown tag '" + tag + "'");
        row[it->second] = v.get<double>();
      }
      model.weights.emplace(feature, std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidModel, e.what());
  }
  auto finite = [](double v) { return std::isfinite(v); };
  bool ok = std::all_of(model.transitions.begin(), model.transitions.end(), finite);
  for (const auto& [_, row] : model.weights) ok = ok && std::all_of(row.begin(), row.end(), finite);
  if (!ok) throw Error(ErrorKind::InvalidModel, "non-finite weight");
  return model;
}

/// Copy of `dataset` with every sentence tagged by the model. The input,
/// including any gold tags it carries, is left untouched.
inline Dataset predict_dataset(const TaggerModel& model, const Dataset& dataset) {
  for (const auto& tag : model.tag_list) {
    auto parsed = parse_tag(tag);
    if (parsed && parsed->prefix != TagPrefix::Outside && !dataset.registry.contains(parsed->label)) {
      throw Error(ErrorKind::InvalidModel, "model label '" + std::string(parsed->label) +
                                               "' missing from the dataset registry");
    }
  }
  TransitionMask mask(model.tag_list);
  Dataset out = dataset;
  for (auto& doc : out.documents) {
    for (auto& sentence : doc.sentences) {
      if (sentence.tokens.empty()) {
        sentence.tags = TagSequence{};
        continue;
      }
      sentence.tags = path_to_tags(model, viterbi(build_lattice(model, sentence), mask).tags);
    }
  }
  return out;
}

/// Attaches tags produced by an external tagger. The CoNLL stream must carry
/// the same documents, sentences and tokens (byte for byte) as `dataset`.
inline Dataset ingest_predictions(const Dataset& dataset, std::istream& conll,
                                  const ConllOptions& options = {}) {
  Dataset predicted = parse_conll(conll, dataset.registry, options);
  if (predicted.documents.size() != dataset.documents.size()) {
    throw Error(ErrorKind::LengthMismatch, "expected " + std::to_string(dataset.documents.size()) +
                                               " documents, predictions have " +
                                               std::to_string(predicted.documents.size()));
  }
  Dataset out = dataset;
  for (std::size_t d = 0; d < out.documents.size(); ++d) {
    auto& doc = out.documents[d];
    const auto& pdoc = predicted.documents[d];
    if (pdoc.sentences.size() != doc.sentences.size()) {
      throw Error(ErrorKind::LengthMismatch, "document '" + doc.paper_id + "': expected " +
                                                 std::to_string(doc.sentences.size()) + " sentences, got " +
                                                 std::to_string(pdoc.sentences.size()));
    }
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      auto& sentence = doc.sentences[s];
      const auto& psent = pdoc.sentences[s];
      const std::size_t common = std::min(sentence.size(), psent.size());
      for (std::size_t i = 0; i < common; ++i) {
        if (sentence.tokens[i].text != psent.tokens[i].text) {
          throw Error(ErrorKind::TokenMismatch, "document '" + doc.paper_id + "' sentence " + std::to_string(s) +
                                                    " token " + std::to_string(i) + ": expected '" +
                                                    sentence.tokens[i].text + "', got '" + psent.tokens[i].text +
                                                    "'");
        }
      }
      if (psent.size() != sentence.size()) {
        throw Error(ErrorKind::LengthMismatch, "document '" + doc.paper_id + "' sentence " + std::to_string(s) +
                                                   ": expected " + std::to_string(sentence.size()) +
                                                   " tokens, got " + std::to_string(psent.size()));
      }
      sentence.tags = psent.tags;
    }
  }
  return out;
}

}  // namespace clinner

#endif  // CLINNER_TAGGER_HPP
