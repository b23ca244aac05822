// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_TOOLS_APP_HPP
#define CLINNER_TOOLS_APP_HPP

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clinner/clinner.hpp"

// The `clinner` command line. Exit codes: 0 success, 1 domain error,
// 2 usage or configuration error.
namespace clinner::cli {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  std::optional<fs::path> registry_path;
  std::optional<fs::path> cache_dir;
  std::uint64_t seed = 42;
  SplitSpec split;
  TaggerConfig tagger;
  std::optional<fs::path> normalizer_path;
  double rate_limit = 3.0;
  std::size_t concurrency = 4;
};

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw UsageError("unknown config key '" + where + key + "'");
  }
}

/// JSON config; relative paths resolve against the config file's directory
/// and must exist. Top-level "seed" seeds both split and tagger unless they
/// carry their own.
inline PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  PipelineConfig cfg;
  try {
    auto j = nlohmann::json::parse(in);
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    reject_unknown(j,
                   {"registry_path", "cache_dir", "seed", "split", "tagger", "normalizer_path", "rate_limit",
                    "concurrency"},
                   "");
    auto base = path.parent_path();
    auto resolve = [&](const std::string& p, bool must_exist) {
      fs::path r = fs::path(p).is_absolute() ? fs::path(p) : base / p;
      if (must_exist && !fs::exists(r)) throw UsageError("config path does not exist: " + r.string());
      return r;
    };
    if (j.contains("registry_path")) cfg.registry_path = resolve(j["registry_path"].get<std::string>(), true);
    if (j.contains("normalizer_path")) cfg.normalizer_path = resolve(j["normalizer_path"].get<std::string>(), true);
    if (j.contains("cache_dir")) cfg.cache_dir = resolve(j["cache_dir"].get<std::string>(), false);
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("rate_limit")) cfg.rate_limit = j["rate_limit"].get<double>();
    if (j.contains("concurrency")) cfg.concurrency = j["concurrency"].get<std::size_t>();
    cfg.split.seed = cfg.seed;
    cfg.tagger.seed = cfg.seed;
    if (j.contains("split")) {
      const auto& s = j["split"];
      reject_unknown(s, {"train_fraction", "seed"}, "split.");
      if (s.contains("train_fraction")) cfg.split.train_fraction = s["train_fraction"].get<double>();
      if (s.contains("seed")) cfg.split.seed = s["seed"].get<std::uint64_t>();
    }
    if (j.contains("tagger")) {
      const auto& t = j["tagger"];
      reject_unknown(t, {"epochs", "seed", "averaging", "window"}, "tagger.");
      if (t.contains("epochs")) cfg.tagger.epochs = t["epochs"].get<std::size_t>();
      if (t.contains("seed")) cfg.tagger.seed = t["seed"].get<std::uint64_t>();
      if (t.contains("averaging")) cfg.tagger.averaging = t["averaging"].get<bool>();
      if (t.contains("window")) cfg.tagger.window = t["window"].get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  if (!(cfg.split.train_fraction > 0.0 && cfg.split.train_fraction < 1.0)) {
    throw UsageError("split.train_fraction must lie in (0, 1)");
  }
  if (cfg.tagger.epochs < 1) throw UsageError("tagger.epochs must be at least 1");
  if (!(cfg.rate_limit > 0.0)) throw UsageError("rate_limit must be positive");
  return cfg;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return in;
}

/// Writes to `path`, or to `fallback` when path is empty or "-".
inline void write_out(const std::string& path, const std::string& data, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << data;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
}

inline std::string conll_text(const Dataset& d) {
  std::ostringstream os;
  write_conll(d, os);
  return os.str();
}

class App {
 public:
  App(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Clinical named-entity pipeline: corpus, tagging and assessment tools", "clinner"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", config_path_, "Pipeline config (JSON)");
    app.add_option("--seed", seed_flag_, "Seed for split and training (overrides config)");
    app.add_option("--registry", registry_flag_, "Label registry file (one label per line)");
    app.add_flag("--strict", strict_, "Treat tag-scheme violations as errors");
    app.add_option("--format", format_, "Report format")->check(CLI::IsMember({"text", "json", "csv"}));

    std::vector<std::pair<CLI::App*, std::function<int()>>> commands;
    auto add = [&](const char* name, const char* help, auto setup, std::function<int()> body) {
      auto* sub = app.add_subcommand(name, help);
      setup(sub);
      commands.emplace_back(sub, std::move(body));
    };

    // fetch
    std::string base_url, query = HarvestQuery{}.query, date_from = "2022-03-01", date_to = "2022-06-30", out_path;
    std::size_t page_size = 100;
    bool all_languages = false, include_preprints = false;
    std::optional<std::size_t> concurrency;
    add("fetch", "Harvest publications into a JSONL corpus",
        [&](CLI::App* s) {
          s->add_option("--base-url", base_url, "Search endpoint (http[s]://... or file://<fixture dir>)")->required();
          s->add_option("--query", query, "Search query");
          s->add_option("--from", date_from, "First publication date (YYYY-MM-DD)");
          s->add_option("--to", date_to, "Last publication date (YYYY-MM-DD)");
          s->add_option("--page-size", page_size, "Records per page")->check(CLI::PositiveNumber);
          s->add_option("--concurrency", concurrency, "Pages in flight")->check(CLI::PositiveNumber);
          s->add_flag("--all-languages", all_languages, "Keep non-English records");
          s->add_flag("--include-preprints", include_preprints, "Keep preprints, grey literature and trials");
          s->add_option("--out", out_path, "Output JSONL (default stdout)");
        },
        [&] {
          HarvestQuery q;
          q.base_url = base_url;
          q.query = query;
          q.date_from = parse_date(date_from);
          q.date_to = parse_date(date_to);
          q.page_size = page_size;
          q.english_only = !all_languages;
          q.exclude_preprints = !include_preprints;
          HarvestOptions opts;
          opts.rate_limit = config_.rate_limit;
          opts.concurrency = concurrency.value_or(config_.concurrency);
          opts.cache_dir = config_.cache_dir;
          HarvestClient client(opts);
          auto records = client.harvest(q);
          std::ostringstream os;
          records_to_corpus(records, os);
          write_out(out_path, os.str(), out_);
          err_ << "fetch: " << records.size() << " records\n";
          return 0;
        });

    // build
    std::string in_path, gazetteer_path;
    add("build", "Segment and tokenize a JSONL corpus into CoNLL",
        [&](CLI::App* s) {
          s->add_option("--in", in_path, "Input JSONL corpus")->required();
          s->add_option("--gazetteer", gazetteer_path, "Pre-annotate with a gazetteer (JSON)");
          s->add_option("--out", out_path, "Output CoNLL (default stdout)");
        },
        [&] {
          auto in = open_in(in_path);
          auto dataset = load_jsonl_corpus(in, registry());
          if (!gazetteer_path.empty()) {
            auto g = open_in(gazetteer_path);
            dataset = load_gazetteer(g, registry()).annotate(dataset);
          } else {
            for (auto& doc : dataset.documents)
              for (auto& s : doc.sentences) s.tags = TagSequence(s.size(), "O");
          }
          write_out(out_path, conll_text(dataset), out_);
          err_ << "build: " << dataset.documents.size() << " documents, " << dataset.sentence_count()
               << " sentences, " << dataset.token_count() << " tokens\n";
          return 0;
        });

    // validate
    add("validate", "Check a CoNLL file against the registry and IOB2",
        [&](CLI::App* s) { s->add_option("--in", in_path, "CoNLL file")->required(); },
        [&] {
          auto in = open_in(in_path);
          ConllReadReport report;
          auto dataset = parse_conll(in, registry(), {SchemeMode::Repair}, &report);
          for (const auto& issue : report.issues) {
            err_ << (strict_ ? "violation" : "warning") << ": line " << issue.line << ": dangling I- tag '"
                 << issue.tag << "'\n";
          }
          if (strict_ && !report.issues.empty()) {
            err_ << "clinner: error[SchemeViolation] line " << report.issues.front().line << ": "
                 << report.issues.size() << " violation(s)\n";
            return 1;
          }
          out_ << "ok: " << dataset.documents.size() << " documents, " << dataset.sentence_count()
               << " sentences, " << dataset.token_count() << " tokens, " << report.issues.size()
               << " repaired tag(s)\n";
          return 0;
        });

    // split
    std::string train_path, test_path;
    std::optional<double> fraction;
    add("split", "Document-level train/test split",
        [&](CLI::App* s) {
          s->add_option("--in", in_path, "CoNLL file")->required();
          s->add_option("--train", train_path, "Train output")->required();
          s->add_option("--test", test_path, "Test output")->required();
          s->add_option("--fraction", fraction, "Train fraction (default 0.7)");
        },
        [&] {
          auto dataset = read_conll(in_path);
          SplitSpec spec = config_.split;
          if (fraction) spec.train_fraction = *fraction;
          auto [train_set, test_set] = split_dataset(dataset, spec);
          write_out(train_path, conll_text(train_set), out_);
          write_out(test_path, conll_text(test_set), out_);
          err_ << "split: " << train_set.documents.size() << " train / " << test_set.documents.size()
               << " test documents\n";
          return 0;
        });

    // train
    std::string model_path;
    std::optional<std::size_t> epochs, window;
    bool no_averaging = false;
    add("train", "Train the native perceptron tagger",
        [&](CLI::App* s) {
          s->add_option("--in", in_path, "Tagged CoNLL training data")->required();
          s->add_option("--model", model_path, "Model output (JSON)")->required();
          s->add_option("--epochs", epochs, "Training epochs")->check(CLI::PositiveNumber);
          s->add_option("--window", window, "Feature window");
          s->add_flag("--no-averaging", no_averaging, "Keep final rather than averaged weights");
        },
        [&] {
          auto dataset = read_conll(in_path);
          TaggerConfig tc = config_.tagger;
          if (epochs) tc.epochs = *epochs;
          if (window) tc.window = *window;
          if (no_averaging) tc.averaging = false;
          auto model = train(dataset, tc);
          write_out(model_path, serialize_model(model), out_);
          err_ << "train: " << dataset.sentence_count() << " sentences, " << model.weights.size() << " features\n";
          return 0;
        });

    // tag
    add("tag", "Tag a CoNLL or JSONL corpus with a trained model",
        [&](CLI::App* s) {
          s->add_option("--model", model_path, "Model file")->required();
          s->add_option("--in", in_path, "Input (.jsonl corpus or CoNLL)")->required();
          s->add_option("--out", out_path, "Output CoNLL (default stdout)");
        },
        [&] {
          auto model = read_model(model_path);
          auto predicted = predict_dataset(model, read_any(in_path));
          write_out(out_path, conll_text(predicted), out_);
          return 0;
        });

    // ingest-pred
    std::string pred_path;
    add("ingest-pred", "Attach external model predictions to a corpus",
        [&](CLI::App* s) {
          s->add_option("--in", in_path, "Reference corpus (.jsonl or CoNLL)")->required();
          s->add_option("--pred", pred_path, "Predictions in CoNLL")->required();
          s->add_option("--out", out_path, "Output CoNLL (default stdout)");
        },
        [&] {
          auto reference = read_any(in_path);
          auto pred = open_in(pred_path);
          auto attached = ingest_predictions(reference, pred, conll_options());
          write_out(out_path, conll_text(attached), out_);
          return 0;
        });

    // eval
    std::string gold_path;
    bool with_errors = false;
    add("eval", "Exact-match span precision/recall/F1",
        [&](CLI::App* s) {
          s->add_option("--gold", gold_path, "Gold CoNLL")->required();
          s->add_option("--pred", pred_path, "Predicted CoNLL")->required();
          s->add_flag("--errors", with_errors, "Add the error breakdown");
        },
        [&] {
          auto gold = read_conll(gold_path);
          auto pred = read_conll(pred_path);
          auto report = evaluate(gold, pred);
          if (format_ == "json") {
            auto j = report_to_json(report);
            if (with_errors) j["errors"] = breakdown_json(error_breakdown(gold, pred));
            out_ << j.dump(2) << "\n";
          } else {
            out_ << render_report(report);
            out_ << "micro F1: " << format_percent(report.micro.f1) << "\n";
            if (with_errors) {
              auto b = error_breakdown(gold, pred);
              out_ << "errors: type=" << b.type_errors << " boundary=" << b.boundary_errors
                   << " spurious=" << b.spurious << " missed=" << b.missed << "\n";
            }
          }
          return 0;
        });

    // agree
    std::vector<std::string> annotations;
    std::string unit = "token";
    add("agree", "Simple (uncorrected) inter-annotator agreement",
        [&](CLI::App* s) {
          s->add_option("--ann", annotations, "Annotator CoNLL file (repeat, at least two)")->required();
          s->add_option("--unit", unit, "Agreement unit")->check(CLI::IsMember({"token", "span"}));
        },
        [&] {
          if (annotations.size() < 2) throw UsageError("agree needs at least two --ann files");
          AnnotatorSet set;
          for (const auto& path : annotations) {
            std::string id = fs::path(path).stem().string();
            if (set.contains(id)) id = path;
            set.emplace(id, read_conll(path));
          }
          auto report = simple_agreement(set, unit == "span" ? AgreementUnit::Span : AgreementUnit::Token);
          if (format_ == "json") {
            out_ << agreement_to_json(report).dump(2) << "\n";
          } else {
            out_ << "unit: " << unit_name(report.unit) << "\nunanimity: " << format_percent(report.unanimity) << "\n";
            for (const auto& [a, row] : report.pairwise)
              for (const auto& [b, v] : row) out_ << a << " ~ " << b << ": " << format_percent(v) << "\n";
          }
          return 0;
        });

    // select
    std::size_t k = 10;
    add("select", "Pick the least certain sentences for annotation",
        [&](CLI::App* s) {
          s->add_option("--model", model_path, "Model file")->required();
          s->add_option("--pool", in_path, "Unlabeled pool (.jsonl or CoNLL)")->required();
          s->add_option("--k", k, "Batch size");
          s->add_option("--out", out_path, "Output JSON (default stdout)");
        },
        [&] {
          auto batch = select_batch(read_model(model_path), read_any(in_path), k);
          write_out(out_path, selection_to_json(batch).dump(2) + "\n", out_);
          return 0;
        });

    // stats
    std::string label;
    std::string normalizer_path;
    add("stats", "Document frequency of one entity label",
        [&](CLI::App* s) {
          s->add_option("--in", in_path, "Tagged CoNLL")->required();
          s->add_option("--label", label, "Entity label")->required();
          s->add_option("--normalizer", normalizer_path, "Synonym config (JSON)");
        },
        [&] {
          auto table = entity_doc_frequency(read_conll(in_path), label, normalizer(normalizer_path));
          if (format_ == "csv") {
            out_ << render_frequency_chart(table, ChartFormat::Csv);
          } else if (format_ == "json") {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& r : table.rows)
              rows.push_back({{"term", r.term}, {"documents", r.document_count}, {"percent", r.percent}});
            out_ << nlohmann::json{{"label", table.label}, {"total_documents", table.total_documents}, {"rows", rows}}
                        .dump(2)
                 << "\n";
          } else {
            out_ << render_frequency_chart(table, ChartFormat::Ascii);
          }
          return 0;
        });

    // keywords
    std::string disease;
    std::size_t min_count = 2;
    std::size_t top_k = 3;
    add("keywords", "Top keywords associated with a disease (document PMI)",
        [&](CLI::App* s) {
          s->add_option("--in", in_path, "Tagged CoNLL")->required();
          s->add_option("--disease", disease, "Disease term")->required();
          s->add_option("--k", top_k, "Number of keywords")->check(CLI::PositiveNumber);
          s->add_option("--min-count", min_count, "Minimum co-occurring documents");
          s->add_option("--normalizer", normalizer_path, "Synonym config (JSON)");
        },
        [&] {
          auto report = top_keywords(read_conll(in_path), disease, top_k, normalizer(normalizer_path), min_count);
          if (format_ == "json") {
            out_ << keywords_to_json(report).dump(2) << "\n";
          } else {
            out_ << report.disease << ":";
            for (std::size_t i = 0; i < report.keywords.size(); ++i) {
              out_ << (i ? ", " : " ") << report.keywords[i].first << " (" << format_fixed(report.keywords[i].second, 3)
                   << ")";
            }
            out_ << "\n";
          }
          return 0;
        });

    // export-finetune-config
    std::vector<std::string> overrides;
    add("export-finetune-config", "Write the transformer fine-tuning hyperparameters",
        [&](CLI::App* s) {
          s->add_option("--set", overrides, "Override as field=value (repeatable)");
          s->add_option("--out", out_path, "Output JSON (default stdout)");
        },
        [&] {
          std::map<std::string, double> parsed;
          for (const auto& o : overrides) {
            auto eq = o.find('=');
            if (eq == std::string::npos) throw UsageError("--set expects field=value, got '" + o + "'");
            double v = 0;
            try {
              std::size_t used = 0;
              v = std::stod(o.substr(eq + 1), &used);
              if (used != o.size() - eq - 1) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
              throw UsageError("--set value is not a number: '" + o + "'");
            }
            parsed[o.substr(0, eq)] = v;
          }
          write_out(out_path, export_finetune_config(parsed), out_);
          return 0;
        });

    // synth
    std::string corpus_out, fixture_dir, gazetteer_out, synonyms_out, registry_out;
    std::size_t fixture_records = 60;
    add("synth", "Generate the synthetic gazetteer corpus and offline fixtures",
        [&](CLI::App* s) {
          s->add_option("--corpus", corpus_out, "Tagged CoNLL corpus output");
          s->add_option("--gazetteer-out", gazetteer_out, "Gazetteer JSON output");
          s->add_option("--fixture-dir", fixture_dir, "Directory for page-<n>.json fixtures");
          s->add_option("--fixture-records", fixture_records, "Records in the fixture");
          s->add_option("--synonyms-out", synonyms_out, "Default symptom synonym config (JSON)");
          s->add_option("--registry-out", registry_out, "Label registry (one label per line)");
        },
        [&] {
          Gazetteer gaz(default_gazetteer_terms(), registry());
          if (!gazetteer_out.empty()) write_out(gazetteer_out, nlohmann::json(gaz.terms()).dump(2) + "\n", out_);
          if (!synonyms_out.empty()) {
            write_out(synonyms_out, nlohmann::json(default_symptom_synonyms()).dump(2) + "\n", out_);
          }
          if (!registry_out.empty()) {
            std::string text;
            for (const auto& label : registry().labels()) text += label + "\n";
            write_out(registry_out, text, out_);
          }
          if (!corpus_out.empty()) {
            SynthSpec spec;
            spec.seed = config_.seed;
            write_out(corpus_out, conll_text(make_synthetic_corpus(gaz, spec, registry())), out_);
          }
          if (!fixture_dir.empty()) {
            fs::create_directories(fixture_dir);
            auto records = make_synthetic_records(gaz, fixture_records, config_.seed);
            constexpr std::size_t kPage = 25;
            for (std::size_t p = 0; p * kPage < records.size(); ++p) {
              std::vector<PublicationRecord> slice(records.begin() + static_cast<std::ptrdiff_t>(p * kPage),
                                                   records.begin() + static_cast<std::ptrdiff_t>(
                                                                         std::min(records.size(), (p + 1) * kPage)));
              write_out((fs::path(fixture_dir) / ("page-" + std::to_string(p + 1) + ".json")).string(),
                        fixture_page(slice, records.size()), out_);
            }
          }
          return 0;
        });

    std::vector<char*> argv;
    std::string prog = "clinner";
    argv.push_back(prog.data());
    std::vector<std::string> copy = args;
    for (auto& a : copy) argv.push_back(a.data());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      int code = app.exit(e, out_, err_);
      return code == 0 ? 0 : 2;
    }

    try {
      if (!config_path_.empty()) config_ = load_config(config_path_);
      if (const char* env = std::getenv("CLINNER_CACHE_DIR"); env && *env) config_.cache_dir = fs::path(env);
      if (seed_flag_) {
        config_.seed = *seed_flag_;
        config_.split.seed = *seed_flag_;
        config_.tagger.seed = *seed_flag_;
      }
      for (auto& [sub, body] : commands) {
        if (sub->parsed()) return body();
      }
      throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
      err_ << "clinner: error[UsageError]: " << e.what() << "\n";
      return 2;
    } catch (const Error& e) {
      err_ << "clinner: " << e.what() << "\n";
      return 1;
    }
  }

 private:
  const LabelRegistry& registry() {
    if (!registry_) {
      std::optional<fs::path> path = config_.registry_path;
      if (!registry_flag_.empty()) path = registry_flag_;
      if (path) {
        auto in = open_in(path->string());
        registry_ = parse_registry(in);
      } else {
        registry_ = default_registry();
      }
    }
    return *registry_;
  }

  ConllOptions conll_options() const { return {strict_ ? SchemeMode::Strict : SchemeMode::Repair}; }

  Dataset read_conll(const std::string& path) {
    auto in = open_in(path);
    ConllReadReport report;
    auto d = parse_conll(in, registry(), conll_options(), &report);
    if (!report.issues.empty()) {
      err_ << "warning: " << path << ": repaired " << report.issues.size() << " dangling I- tag(s)\n";
    }
    return d;
  }

  Dataset read_any(const std::string& path) {
    if (fs::path(path).extension() == ".jsonl") {
      auto in = open_in(path);
      return load_jsonl_corpus(in, registry());
    }
    return read_conll(path);
  }

  TaggerModel read_model(const std::string& path) {
    auto in = open_in(path);
    return load_model(in);
  }

  MentionNormalizer normalizer(const std::string& flag_path) {
    std::optional<fs::path> path = config_.normalizer_path;
    if (!flag_path.empty()) path = flag_path;
    if (!path) return MentionNormalizer(default_symptom_synonyms());
    auto in = open_in(path->string());
    return load_normalizer(in);
  }

  static nlohmann::json breakdown_json(const ErrorBreakdown& b) {
    return {{"type_errors", b.type_errors},
            {"boundary_errors", b.boundary_errors},
            {"spurious", b.spurious},
            {"missed", b.missed}};
  }

  std::ostream& out_;
  std::ostream& err_;
  std::string config_path_;
  std::optional<std::uint64_t> seed_flag_;
  std::string registry_flag_;
  bool strict_ = false;
  std::string format_ = "text";
  PipelineConfig config_;
  std::optional<LabelRegistry> registry_;
};

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return App(out, err).run(args);
}

}  // namespace clinner::cli

#endif  // CLINNER_TOOLS_APP_HPP
