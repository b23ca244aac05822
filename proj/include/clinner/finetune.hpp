// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_FINETUNE_HPP
#define CLINNER_FINETUNE_HPP

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "clinner/error.hpp"

// Hyperparameters for fine-tuning a transformer tagger outside this toolkit.
// Nothing here drives the native perceptron.
namespace clinner {

struct FineTuneField {
  std::string_view name;
  double default_value;
  bool integral;
  double min;
  double max;
  bool min_exclusive = false;
  bool max_exclusive = false;
};

/// Reported values and search ranges. Fields without a reported range only
/// have to be in their natural domain.
inline const std::vector<FineTuneField>& finetune_fields() {
  static const double kInf = HUGE_VAL;
  static const double kIntMax = 2147483647.0;
  static const std::vector<FineTuneField> fields{
      {"dropout", 0.5, false, 0.2, 0.7},
      {"lstm_state_size", 200, true, 200, 300},
      {"batch_size", 16, true, 8, 128},
      {"epochs", 40, true, 20, 80},
      {"learning_rate", 1e-5, false, 1e-9, 1e-2},
      {"lr_decay", 0.005, false, 0.001, 0.01},
      {"warmup_steps", 10000, true, 0, kIntMax},
      {"adam_beta1", 0.9, false, 0, 1, false, true},
      {"adam_beta2", 0.999, false, 0, 1, false, true},
      {"word_dim", 300, true, 50, 450},
      {"lstm_hidden", 300, true, 1, kIntMax},
      {"grad_clip", 5.0, false, 0, kInf, true},
      {"max_seq_len", 128, true, 1, kIntMax},
      {"layers", 12, true, 1, kIntMax},
      {"attention_heads", 12, true, 1, kIntMax},
      {"embedding_size", 768, true, 1, kIntMax},
      {"ner_sentence_len", 512, true, 1, kIntMax},
  };
  return fields;
}

struct FineTuneConfig {
  double dropout = 0.5;
  int lstm_state_size = 200;
  int batch_size = 16;
  int epochs = 40;
  double learning_rate = 1e-5;
  double lr_decay = 0.005;
  int warmup_steps = 10000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  int word_dim = 300;
  int lstm_hidden = 300;
  double grad_clip = 5.0;
  int max_seq_len = 128;
  int layers = 12;
  int attention_heads = 12;
  int embedding_size = 768;
  int ner_sentence_len = 512;

  friend bool operator==(const FineTuneConfig&, const FineTuneConfig&) = default;
};

inline nlohmann::json to_json(const FineTuneConfig& c) {
  return nlohmann::json{
      {"dropout", c.dropout},
      {"lstm_state_size", c.lstm_state_size},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"learning_rate", c.learning_rate},
      {"lr_decay", c.lr_decay},
      {"warmup_steps", c.warmup_steps},
      {"adam_beta1", c.adam_beta1},
      {"adam_beta2", c.adam_beta2},
      {"word_dim", c.word_dim},
      {"lstm_hidden", c.lstm_hidden},
      {"grad_clip", c.grad_clip},
      {"max_seq_len", c.max_seq_len},
      {"layers", c.layers},
      {"attention_heads", c.attention_heads},
      {"embedding_size", c.embedding_size},
      {"ner_sentence_len", c.ner_sentence_len},
  };
}

inline std::string describe_range(const FineTuneField& f) {
  std::ostringstream os;
  os << (f.min_exclusive ? "(" : "[") << f.min << ", ";
  if (std::isinf(f.max)) os << "inf)";
  else os << f.max << (f.max_exclusive ? ")" : "]");
  return os.str();
}

/// Applies `overrides` to the defaults, rejecting unknown fields, values
/// outside the allowed range and non-integers for integral fields.
inline FineTuneConfig make_finetune_config(const std::map<std::string, double>& overrides = {}) {
  nlohmann::json j = to_json(FineTuneConfig{});
  for (const auto& [name, value] : overrides) {
    const FineTuneField* field = nullptr;
    for (const auto& f : finetune_fields()) {
      if (f.name == name) field = &f;
    }
    if (!field) throw Error(ErrorKind::InvalidArgument, "unknown fine-tune field '" + name + "'");
    bool below = field->min_exclusive ? value <= field->min : value < field->min;
    bool above = field->max_exclusive ? value >= field->max : value > field->max;
    if (!std::isfinite(value) || below || above || (field->integral && std::floor(value) != value)) {
      std::ostringstream os;
      os << name << " = " << value << " outside " << describe_range(*field) << (field->integral ? " (integer)" : "");
      throw Error(ErrorKind::OutOfRange, os.str());
    }
    if (field->integral) j[name] = static_cast<int>(value);
    else j[name] = value;
  }
  FineTuneConfig c;
  c.dropout = j["dropout"];
  c.lstm_state_size = j["lstm_state_size"];
  c.batch_size = j["batch_size"];
  c.epochs = j["epochs"];
  c.learning_rate = j["learning_rate"];
  c.lr_decay = j["lr_decay"];
  c.warmup_steps = j["warmup_steps"];
  c.adam_beta1 = j["adam_beta1"];
  c.adam_beta2 = j["adam_beta2"];
  c.word_dim = j["word_dim"];
  c.lstm_hidden = j["lstm_hidden"];
  c.grad_clip = j["grad_clip"];
  c.max_seq_len = j["max_seq_len"];
  c.layers = j["layers"];
  c.attention_heads = j["attention_heads"];
  c.embedding_size = j["embedding_size"];
  c.ner_sentence_len = j["ner_sentence_len"];
  return c;
}

/// Pretty-printed JSON with sorted keys.
inline std::string export_finetune_config(const std::map<std::string, double>& overrides = {}) {
  return to_json(make_finetune_config(overrides)).dump(2) + "\n";
}

}  // namespace clinner

#endif  // CLINNER_FINETUNE_HPP
