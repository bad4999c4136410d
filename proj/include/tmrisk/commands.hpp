#pragma once

// Subcommand implementations behind the tmrisk CLI. Each command validates
// its inputs, writes its artifacts under RunConfig::out and prints a short
// summary. Errors are thrown; the CLI maps them to a nonzero exit code.

#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmrisk/csv.hpp"
#include "tmrisk/eortc.hpp"
#include "tmrisk/interpret.hpp"
#include "tmrisk/logistic.hpp"
#include "tmrisk/metrics.hpp"
#include "tmrisk/model_io.hpp"
#include "tmrisk/schema.hpp"
#include "tmrisk/search.hpp"
#include "tmrisk/split.hpp"
#include "tmrisk/synth.hpp"
#include "tmrisk/tsetlin.hpp"
#include "tmrisk/version.hpp"

namespace tmrisk::cli {

namespace fs = std::filesystem;

struct RunConfig {
  std::string subcommand;
  std::optional<fs::path> schema;
  std::optional<fs::path> data;
  std::optional<fs::path> model;
  fs::path out = "out";
  std::uint64_t seed = kDefaultSeed;
  double test_fraction = 0.2;

  // generate
  std::size_t n = 330;
  double positive_fraction = 0.40;
  double noise = 0.05;
  std::optional<fs::path> cohort_config;

  // train
  TMParams tm;

  // explain
  std::optional<std::size_t> patient;
  std::size_t top_k = 20;
  bool explain_test_split = false;

  // evaluate
  std::vector<std::string> models{"tm", "lr", "eortc"};
  std::string eortc_threshold = "5-9";
  std::optional<fs::path> eortc_columns;
  bool cross_validate = false;  // k-fold over the training split instead of the held-out split
  std::size_t folds = 5;
  LRHyperparams lr;

  // tune
  std::size_t trials = 50;
  double complexity_penalty = kDefaultComplexityPenalty;
  std::optional<fs::path> search_space;
  bool retrain = false;

  /// Flags that shape the artifacts. The output directory is left out so
  /// that the same run written elsewhere stays byte-identical.
  nlohmann::json to_json() const {
    auto opt_path = [](const std::optional<fs::path>& p) -> nlohmann::json {
      return p ? nlohmann::json(p->generic_string()) : nlohmann::json(nullptr);
    };
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["schema"] = opt_path(schema);
    j["data"] = opt_path(data);
    j["model"] = opt_path(model);
    j["seed"] = seed;
    j["test_fraction"] = test_fraction;
    if (subcommand == "generate") {
      j["n"] = n;
      j["positive_fraction"] = positive_fraction;
      j["noise"] = noise;
      j["cohort_config"] = opt_path(cohort_config);
    }
    if (subcommand == "train" || subcommand == "tune") j["tm"] = params_to_json(tm);
    if (subcommand == "explain") {
      j["patient"] = patient ? nlohmann::json(*patient) : nlohmann::json(nullptr);
      j["top_k"] = top_k;
      j["explain_test_split"] = explain_test_split;
    }
    if (subcommand == "evaluate") {
      j["models"] = models;
      j["eortc_threshold"] = eortc_threshold;
      j["eortc_columns"] = opt_path(eortc_columns);
      j["cross_validate"] = cross_validate;
      j["folds"] = folds;
      j["lr"] = {{"l2", lr.l2}, {"learning_rate", lr.learning_rate}, {"iterations", lr.iterations}};
    }
    if (subcommand == "tune") {
      j["trials"] = trials;
      j["complexity_penalty"] = complexity_penalty;
      j["search_space"] = opt_path(search_space);
      j["retrain"] = retrain;
    }
    return j;
  }

  std::string config_hash() const {
    const std::string canon = to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
  }

  nlohmann::json provenance() const {
    return {{"tool", kToolName}, {"version", kVersion}, {"seed", seed}, {"config_hash", config_hash()},
            {"subcommand", subcommand}};
  }

  std::vector<std::string> provenance_comments() const {
    return {std::string(kToolName) + " " + kVersion + " " + subcommand + " seed=" + std::to_string(seed) +
            " config_hash=" + config_hash()};
  }
};

namespace detail {

inline void require_existing(const std::optional<fs::path>& p, const char* what) {
  if (!p) throw InvalidArgument(std::string("--") + what + " is required");
  if (!fs::exists(*p)) throw IoError(std::string(what) + " file '" + p->string() + "' does not exist");
}

inline FeatureSchema load_schema(const RunConfig& cfg) {
  if (!cfg.schema) return photo_like_schema();
  require_existing(cfg.schema, "schema");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(*cfg.schema));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("schema file: " + std::string(e.what()));
  }
  return FeatureSchema::from_json(j);
}

inline nlohmann::json load_json(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw IoError(std::string(what) + " file '" + p.string() + "' does not exist");
  try {
    return nlohmann::json::parse(read_text_file(p));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string(what) + " file: " + e.what());
  }
}

inline void write_json(const fs::path& p, const nlohmann::json& j) { write_text_file(p, j.dump(2) + "\n"); }

struct LoadedData {
  CsvTable table;
  std::vector<PatientRecord> records;
  std::vector<Outcome> labels;
};

inline LoadedData load_data(const RunConfig& cfg, const FeatureSchema& schema) {
  require_existing(cfg.data, "data");
  LoadedData d;
  d.table = read_csv(*cfg.data);
  d.records = records_from_table(d.table, schema);
  for (const auto& r : d.records) d.labels.push_back(*r.label);
  return d;
}

inline std::string patient_id(const CsvTable& table, std::size_t row) {
  if (auto c = table.column("id")) return table.rows[row][*c];
  return std::to_string(row);
}

inline std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(4) << v;
  return ss.str();
}

inline CsvTable curve_table(const LearningCurve& curve) {
  CsvTable t;
  t.header = {"epoch", "train_accuracy", "holdout_accuracy"};
  for (const auto& e : curve.epochs)
    t.rows.push_back({std::to_string(e.epoch), format_number(e.train_accuracy),
                      e.holdout_accuracy ? format_number(*e.holdout_accuracy) : ""});
  return t;
}

}  // namespace detail

/// Synthetic cohort CSV, its manifest, and the schema it conforms to.
inline void cmd_generate(const RunConfig& cfg, std::ostream& log) {
  const FeatureSchema schema = detail::load_schema(cfg);
  CohortConfig cohort_cfg = photo_like_cohort_config(cfg.seed);
  if (cfg.cohort_config) cohort_cfg = cohort_config_from_json(detail::load_json(*cfg.cohort_config, "cohort config"), cohort_cfg);
  cohort_cfg.n = cfg.n;
  cohort_cfg.positive_fraction = cfg.positive_fraction;
  cohort_cfg.noise = cfg.noise;
  cohort_cfg.seed = cfg.seed;
  const Cohort cohort = generate_cohort(schema, cohort_cfg);

  write_csv_file(cfg.out / "cohort.csv", cohort.table, cfg.provenance_comments());
  nlohmann::json manifest;
  manifest["provenance"] = cfg.provenance();
  manifest["config"] = cohort_config_to_json(cohort_cfg, schema);
  manifest["schema_fingerprint"] = schema.fingerprint();
  manifest["background_label"] = to_int(cohort.background);
  manifest["positives"] = cohort.positives();
  manifest["positive_fraction"] = cohort.positive_fraction;
  detail::write_json(cfg.out / "cohort_manifest.json", manifest);
  detail::write_json(cfg.out / "schema.json", schema.to_json());
  log << "generated " << cohort.records.size() << " records, " << cohort.positives() << " positive ("
      << detail::fmt(cohort.positive_fraction) << ")\n";
}

/// Stratified split, TM training with a held-out learning curve, and test metrics.
inline void cmd_train(const RunConfig& cfg, std::ostream& log) {
  cfg.tm.validate();
  const FeatureSchema schema = detail::load_schema(cfg);
  const auto data = detail::load_data(cfg, schema);
  const auto split = stratified_split(data.labels, cfg.test_fraction, cfg.seed);
  const auto samples = binarize_dataset(data.records, schema);
  const auto train = gather<Sample>(samples, split.train);
  const auto test = gather<Sample>(samples, split.test);

  auto fitted = fit(schema, train, std::span<const Sample>(test), cfg.tm);
  fitted.model.metadata = {{"provenance", cfg.provenance()},
                           {"split", {{"seed", cfg.seed}, {"test_fraction", cfg.test_fraction}}}};
  save_model(cfg.out / "model.json", fitted.model);
  write_csv_file(cfg.out / "learning_curve.csv", detail::curve_table(fitted.curve), cfg.provenance_comments());

  const auto test_metrics = evaluate_model(fitted.model, test);
  nlohmann::json metrics;
  metrics["provenance"] = cfg.provenance();
  metrics["train_size"] = train.size();
  metrics["test_size"] = test.size();
  metrics["train"] = evaluate_model(fitted.model, train).to_json();
  metrics["test"] = test_metrics.to_json();
  detail::write_json(cfg.out / "metrics.json", metrics);
  log << "trained " << cfg.tm.num_clauses << " clauses for " << cfg.tm.epochs << " epochs on " << train.size()
      << " records; test macro-F1 " << detail::fmt(test_metrics.macro_f1) << ", accuracy "
      << detail::fmt(test_metrics.accuracy) << "\n";
}

inline TsetlinMachine load_model_checked(const RunConfig& cfg) {
  detail::require_existing(cfg.model, "model");
  return load_model(*cfg.model);
}

inline std::string format_rules(const std::vector<ReadableClause>& rules) {
  std::ostringstream ss;
  for (const auto& r : rules) {
    ss << "C" << r.id << " [" << (r.polarity == Polarity::positive ? '+' : '-') << "] fires=" << r.fire_count << ": "
       << r.rule_text() << "\n";
    if (r.condensed.size() != r.predicates.size()) {
      ss << "    literals:";
      for (std::size_t i = 0; i < r.predicates.size(); ++i) ss << (i ? " AND " : " ") << r.predicates[i];
      ss << "\n";
    }
  }
  return ss.str();
}

/// Readable rules, heatmap CSV + legend, and an optional per-patient listing.
inline void cmd_explain(const RunConfig& cfg, std::ostream& log) {
  const TsetlinMachine model = load_model_checked(cfg);
  const FeatureSchema schema = cfg.schema ? detail::load_schema(cfg) : model.schema();
  if (schema.fingerprint() != model.schema().fingerprint())
    throw SchemaError("schema fingerprint " + schema.fingerprint() + " does not match the model's " +
                      model.schema().fingerprint());
  const auto data = detail::load_data(cfg, schema);
  auto samples = binarize_dataset(data.records, schema);
  std::vector<std::size_t> rows(samples.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  if (cfg.explain_test_split) {
    rows = stratified_split(data.labels, cfg.test_fraction, cfg.seed).test;
    samples = gather<Sample>(samples, rows);
  }

  const auto rules = extract_rules(model, schema, samples);
  std::string text;
  for (const auto& c : cfg.provenance_comments()) text += "# " + c + "\n";
  text += format_rules(rules);
  write_text_file(cfg.out / "rules.txt", text);

  const auto matrix = activation_matrix(model, samples);
  export_heatmap_data(matrix, rules, cfg.top_k, cfg.out / "heatmap.csv", cfg.out / "heatmap_legend.json",
                      cfg.provenance_comments(), cfg.provenance());
  log << "wrote " << rules.size() << " rules and a " << matrix.patients() << "-patient heatmap\n";

  if (cfg.patient) {
    if (*cfg.patient >= samples.size())
      throw InvalidArgument("patient row " + std::to_string(*cfg.patient) + " out of range (" +
                            std::to_string(samples.size()) + " rows)");
    const auto e = explain_patient(model, samples[*cfg.patient].x);
    std::ostringstream ss;
    ss << "patient " << detail::patient_id(data.table, rows[*cfg.patient]) << " (row " << *cfg.patient
       << "): predicted " << outcome_name(e.prediction) << ", true " << outcome_name(samples[*cfg.patient].label)
       << ", class sum " << e.class_sum << "\n";
    ss << "fired clauses (" << e.fired.size() << "):\n";
    for (const auto& r : e.fired)
      ss << "  C" << r.id << " [" << (r.polarity == Polarity::positive ? '+' : '-') << "] " << r.rule_text() << "\n";
    write_text_file(cfg.out / ("patient_" + std::to_string(*cfg.patient) + ".txt"), ss.str());
    log << ss.str();
  }
}

struct ComparisonRow {
  std::string model;
  MetricsReport metrics;
};

namespace detail {

inline void write_comparison(const RunConfig& cfg, const std::vector<ComparisonRow>& rows, const std::string& mode) {
  CsvTable t;
  t.header = {"model", "precision", "recall", "f1", "accuracy"};
  nlohmann::json j;
  j["provenance"] = cfg.provenance();
  j["mode"] = mode;
  nlohmann::json models = nlohmann::json::array();
  for (const auto& r : rows) {
    t.rows.push_back({r.model, format_number(r.metrics.macro_precision), format_number(r.metrics.macro_recall),
                      format_number(r.metrics.macro_f1), format_number(r.metrics.accuracy)});
    models.push_back({{"model", r.model}, {"metrics", r.metrics.to_json()}});
  }
  j["models"] = std::move(models);
  write_csv_file(cfg.out / "comparison.csv", t, cfg.provenance_comments());
  write_json(cfg.out / "comparison.json", j);
}

}  // namespace detail

/// TM / LR / EORTC on the same split (or stratified folds of the training
/// split), one comparison row per model.
inline std::vector<ComparisonRow> cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  for (const auto& m : cfg.models)
    if (m != "tm" && m != "lr" && m != "eortc") throw InvalidArgument("unknown model '" + m + "'");
  if (cfg.models.empty()) throw InvalidArgument("no models selected");
  auto wants = [&cfg](const char* m) { return std::find(cfg.models.begin(), cfg.models.end(), m) != cfg.models.end(); };

  const FeatureSchema schema = detail::load_schema(cfg);
  std::optional<TsetlinMachine> tm;
  if (wants("tm")) {
    tm = load_model_checked(cfg);
    if (tm->schema().fingerprint() != schema.fingerprint())
      throw SchemaError("model schema fingerprint " + tm->schema().fingerprint() + " does not match data schema " +
                        schema.fingerprint());
  }
  const auto data = detail::load_data(cfg, schema);
  const auto samples = binarize_dataset(data.records, schema);
  const auto threshold = eortc::risk_group_from_string(cfg.eortc_threshold);
  eortc::ColumnMap columns;
  if (cfg.eortc_columns) columns = eortc::ColumnMap::from_json(detail::load_json(*cfg.eortc_columns, "EORTC column map"));
  std::vector<eortc::Result> eortc_scores;
  if (wants("eortc"))
    for (std::size_t r = 0; r < data.records.size(); ++r)
      eortc_scores.push_back(eortc::recurrence_score(eortc::parse_factors(data.table, r, columns)));

  const auto split = stratified_split(data.labels, cfg.test_fraction, cfg.seed);

  // Scores one (train, test) partition given as row indices.
  struct Scored {
    std::vector<ComparisonRow> rows;
    CsvTable predictions;
  };
  auto score = [&](std::span<const std::size_t> train_rows, std::span<const std::size_t> test_rows,
                   const TsetlinMachine* fixed_tm) {
    Scored out;
    out.predictions.header = {"patient_id", "model", "label", "score"};
    const auto train = gather<Sample>(samples, train_rows);
    const auto test = gather<Sample>(samples, test_rows);
    std::vector<Outcome> truth;
    for (const auto& s : test) truth.push_back(s.label);
    auto add = [&](const std::string& name, const std::vector<Outcome>& preds, const std::vector<std::string>& scores) {
      out.rows.push_back({name, compute_metrics(preds, truth)});
      for (std::size_t i = 0; i < test_rows.size(); ++i)
        out.predictions.rows.push_back(
            {detail::patient_id(data.table, test_rows[i]), name, std::to_string(to_int(preds[i])), scores[i]});
    };
    if (tm) {
      std::optional<TsetlinMachine> refit;
      if (!fixed_tm) refit = fit(schema, train, std::nullopt, tm->params()).model;
      const TsetlinMachine& m = fixed_tm ? *fixed_tm : *refit;
      std::vector<Outcome> p;
      std::vector<std::string> sc;
      for (const auto& s : test) {
        p.push_back(predict(m, s.x));
        sc.push_back(std::to_string(class_sum(m, s.x, EvalMode::infer)));
      }
      add("TM", p, sc);
    }
    if (wants("lr")) {
      const auto lr = lr_fit(train, cfg.lr);
      std::vector<Outcome> p;
      std::vector<std::string> sc;
      for (const auto& s : test) {
        const auto r = lr_predict(lr, s.x);
        p.push_back(r.label);
        sc.push_back(format_number(r.probability));
      }
      add("LR", p, sc);
    }
    if (wants("eortc")) {
      std::vector<Outcome> p;
      std::vector<std::string> sc;
      for (auto row : test_rows) {
        p.push_back(eortc::predict(eortc_scores[row], threshold));
        sc.push_back(std::to_string(eortc_scores[row].score));
      }
      add("EORTC", p, sc);
    }
    return out;
  };

  std::vector<ComparisonRow> table;
  if (!cfg.cross_validate) {
    auto scored = score(split.train, split.test, tm ? &*tm : nullptr);
    write_csv_file(cfg.out / "predictions.csv", scored.predictions, cfg.provenance_comments());
    table = std::move(scored.rows);
    detail::write_comparison(cfg, table, "holdout");
  } else {
    const auto train_labels = gather<Outcome>(data.labels, split.train);
    const auto folds = stratified_kfold(train_labels, cfg.folds, derive_seed(cfg.seed, 0xf01d));
    std::vector<std::vector<MetricsReport>> per_model;
    std::vector<std::string> names;
    CsvTable predictions;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto tr = gather<std::size_t>(split.train, folds[f].train);
      const auto te = gather<std::size_t>(split.train, folds[f].test);
      auto scored = score(tr, te, nullptr);
      if (f == 0) {
        per_model.resize(scored.rows.size());
        for (const auto& r : scored.rows) names.push_back(r.model);
        predictions.header = scored.predictions.header;
        predictions.header.insert(predictions.header.begin(), "fold");
      }
      for (std::size_t m = 0; m < scored.rows.size(); ++m) per_model[m].push_back(scored.rows[m].metrics);
      for (auto& row : scored.predictions.rows) {
        row.insert(row.begin(), std::to_string(f));
        predictions.rows.push_back(std::move(row));
      }
    }
    for (std::size_t m = 0; m < names.size(); ++m) table.push_back({names[m], average_reports(per_model[m])});
    write_csv_file(cfg.out / "predictions.csv", predictions, cfg.provenance_comments());
    detail::write_comparison(cfg, table, std::to_string(cfg.folds) + "-fold");
  }
  for (const auto& r : table)
    log << std::left << std::setw(6) << r.model << " P " << detail::fmt(r.metrics.macro_precision) << "  R "
        << detail::fmt(r.metrics.macro_recall) << "  F1 " << detail::fmt(r.metrics.macro_f1) << "  acc "
        << detail::fmt(r.metrics.accuracy) << "\n";
  return table;
}

/// Random search on a validation split carved from the training split;
/// optionally retrains the winner on the whole training split.
inline SearchResult cmd_tune(const RunConfig& cfg, std::ostream& log) {
  const FeatureSchema schema = detail::load_schema(cfg);
  const SearchSpace space = cfg.search_space ? SearchSpace::from_json(detail::load_json(*cfg.search_space, "search space"))
                                             : SearchSpace{};
  const auto data = detail::load_data(cfg, schema);
  const auto split = stratified_split(data.labels, cfg.test_fraction, cfg.seed);
  const auto train_records = gather<PatientRecord>(data.records, split.train);
  const auto train_labels = gather<Outcome>(data.labels, split.train);
  const auto inner = stratified_split(train_labels, 0.2, derive_seed(cfg.seed, 0x7a11));
  const auto fit_records = gather<PatientRecord>(train_records, inner.train);
  const auto val_records = gather<PatientRecord>(train_records, inner.test);

  SearchOptions options;
  options.complexity_penalty = cfg.complexity_penalty;
  options.base = cfg.tm;
  const auto result = random_search(space, cfg.trials, schema, fit_records, val_records, cfg.seed, options);

  nlohmann::json log_doc;
  log_doc["provenance"] = cfg.provenance();
  log_doc["space"] = space.to_json();
  log_doc["best"] = result.best;
  log_doc["trials"] = result.log_json();
  detail::write_json(cfg.out / "trials.json", log_doc);
  nlohmann::json best = result.winner().to_json();
  best["provenance"] = cfg.provenance();
  detail::write_json(cfg.out / "best_params.json", best);

  const auto& w = result.winner();
  log << "ran " << result.trials.size() << " trials; best #" << w.index << " n_bins=" << w.params.n_bins
      << " clauses=" << w.params.tm.num_clauses << " T=" << w.params.tm.threshold
      << " s=" << format_number(w.params.tm.specificity) << " epochs=" << w.params.tm.epochs
      << " objective=" << detail::fmt(w.objective) << "\n";

  if (cfg.retrain) {
    if (w.failed()) throw Error("every trial failed; nothing to retrain");
    const FeatureSchema tuned = schema.with_bins(w.params.n_bins);
    const auto samples = binarize_dataset(data.records, tuned);
    const auto train = gather<Sample>(samples, split.train);
    const auto test = gather<Sample>(samples, split.test);
    TMParams params = w.params.tm;
    params.seed = cfg.seed;
    auto fitted = fit(tuned, train, std::span<const Sample>(test), params);
    fitted.model.metadata = {{"provenance", cfg.provenance()},
                             {"split", {{"seed", cfg.seed}, {"test_fraction", cfg.test_fraction}}}};
    save_model(cfg.out / "model.json", fitted.model);
    detail::write_json(cfg.out / "schema.json", tuned.to_json());
    const auto m = evaluate_model(fitted.model, test);
    detail::write_json(cfg.out / "metrics.json", {{"provenance", cfg.provenance()}, {"test", m.to_json()}});
    log << "retrained winner: test macro-F1 " << detail::fmt(m.macro_f1) << "\n";
  }
  return result;
}

inline void run(const RunConfig& cfg, std::ostream& log) {
  if (cfg.subcommand == "generate") cmd_generate(cfg, log);
  else if (cfg.subcommand == "train") cmd_train(cfg, log);
  else if (cfg.subcommand == "explain") cmd_explain(cfg, log);
  else if (cfg.subcommand == "evaluate") cmd_evaluate(cfg, log);
  else if (cfg.subcommand == "tune") cmd_tune(cfg, log);
  else throw InvalidArgument("unknown subcommand '" + cfg.subcommand + "'");
}

}  // namespace tmrisk::cli
