#pragma once

// Seeded uniform random search over Tsetlin machine hyperparameters. The
// objective trades validation macro-F1 against clause-bank size:
//   objective = macro_f1 - lambda * included_literals / (num_clauses * 2B)

#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmrisk/metrics.hpp"
#include "tmrisk/random.hpp"
#include "tmrisk/schema.hpp"
#include "tmrisk/tsetlin.hpp"

namespace tmrisk {

/// Runs `predict` on every row and scores it against the row labels.
template <class Row, std::invocable<const Row&> Predict>
MetricsReport evaluate_model(Predict&& predict, std::span<const Row> rows) {
  std::vector<Outcome> preds, labels;
  preds.reserve(rows.size());
  labels.reserve(rows.size());
  for (const auto& r : rows) {
    preds.push_back(predict(r));
    if constexpr (requires { r.label.value(); })
      labels.push_back(r.label.value());
    else
      labels.push_back(r.label);
  }
  return compute_metrics(preds, labels);
}

inline MetricsReport evaluate_model(const TsetlinMachine& model, std::span<const Sample> test) {
  return evaluate_model<Sample>([&model](const Sample& s) { return predict(model, s.x); }, test);
}

struct SearchSpace {
  std::vector<std::size_t> n_bins{2, 4, 6};
  std::vector<int> num_clauses{20, 40, 80, 120};
  std::vector<int> threshold{10, 20, 38, 50};
  std::vector<double> specificity{2.5, 3.0, 4.0, 5.0};
  std::vector<int> epochs{50, 100};

  void validate() const {
    if (n_bins.empty() || num_clauses.empty() || threshold.empty() || specificity.empty() || epochs.empty())
      throw InvalidArgument("every search-space candidate set must be non-empty");
  }

  nlohmann::json to_json() const {
    return {{"n_bins", n_bins}, {"num_clauses", num_clauses}, {"threshold", threshold},
            {"specificity", specificity}, {"epochs", epochs}};
  }

  static SearchSpace from_json(const nlohmann::json& j) {
    SearchSpace s;
    try {
      if (j.contains("n_bins")) s.n_bins = j["n_bins"].get<std::vector<std::size_t>>();
      if (j.contains("num_clauses")) s.num_clauses = j["num_clauses"].get<std::vector<int>>();
      if (j.contains("threshold")) s.threshold = j["threshold"].get<std::vector<int>>();
      if (j.contains("specificity")) s.specificity = j["specificity"].get<std::vector<double>>();
      if (j.contains("epochs")) s.epochs = j["epochs"].get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("search space JSON: ") + e.what());
    }
    s.validate();
    return s;
  }
};

struct TrialParams {
  std::size_t n_bins = 4;
  TMParams tm;
};

struct TrialResult {
  std::size_t index = 0;
  TrialParams params;
  std::optional<MetricsReport> validation;
  std::size_t complexity = 0;  // included literals
  double normalised_complexity = 0.0;
  double objective = -std::numeric_limits<double>::infinity();
  std::string error;  // non-empty for failed trials

  bool failed() const noexcept { return !error.empty(); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["trial"] = index;
    j["seed"] = params.tm.seed;
    j["params"] = {{"n_bins", params.n_bins},
                   {"num_clauses", params.tm.num_clauses},
                   {"threshold", params.tm.threshold},
                   {"specificity", params.tm.specificity},
                   {"epochs", params.tm.epochs}};
    if (failed()) {
      j["status"] = "failed";
      j["error"] = error;
      j["objective"] = nullptr;
    } else {
      j["status"] = "ok";
      j["objective"] = objective;
      j["complexity"] = complexity;
      j["normalised_complexity"] = normalised_complexity;
      j["validation"] = validation->to_json();
    }
    return j;
  }
};

struct SearchResult {
  std::size_t best = 0;
  std::vector<TrialResult> trials;

  const TrialResult& winner() const { return trials.at(best); }

  nlohmann::json log_json() const {
    nlohmann::json log = nlohmann::json::array();
    for (const auto& t : trials) log.push_back(t.to_json());
    return log;
  }
};

inline constexpr double kDefaultComplexityPenalty = 0.05;

inline double objective_value(double macro_f1, std::size_t included_literals, int num_clauses,
                              std::size_t literal_count, double penalty = kDefaultComplexityPenalty) {
  const double capacity = static_cast<double>(num_clauses) * static_cast<double>(literal_count);
  return macro_f1 - penalty * (capacity > 0 ? static_cast<double>(included_literals) / capacity : 0.0);
}

struct SearchOptions {
  double complexity_penalty = kDefaultComplexityPenalty;
  TMParams base;  // N and class weights are inherited from here
};

/// Trains and scores one candidate configuration.
inline TrialResult run_trial(std::size_t index, const TrialParams& params, const FeatureSchema& base_schema,
                             std::span<const PatientRecord> train, std::span<const PatientRecord> validation,
                             double penalty) {
  TrialResult t;
  t.index = index;
  t.params = params;
  try {
    const FeatureSchema schema = base_schema.with_bins(params.n_bins);
    const auto tr = binarize_dataset(train, schema);
    const auto va = binarize_dataset(validation, schema);
    auto fitted = fit(schema, tr, std::nullopt, params.tm);
    t.validation = evaluate_model(fitted.model, va);
    t.complexity = fitted.model.complexity();
    t.normalised_complexity = static_cast<double>(t.complexity) /
                              (static_cast<double>(params.tm.num_clauses) * static_cast<double>(schema.literal_count()));
    t.objective = objective_value(t.validation->macro_f1, t.complexity, params.tm.num_clauses,
                                  schema.literal_count(), penalty);
  } catch (const std::exception& e) {
    t.error = e.what();
    t.objective = -std::numeric_limits<double>::infinity();
  }
  return t;
}

/// Samples `trials` configurations uniformly from `space`; trial i trains
/// with seed derive_seed(seed, i). Failed trials are logged with objective
/// -inf. The winner is the first trial with the maximal objective.
inline SearchResult random_search(const SearchSpace& space, std::size_t trials, const FeatureSchema& schema,
                                  std::span<const PatientRecord> train, std::span<const PatientRecord> validation,
                                  std::uint64_t seed, const SearchOptions& options = {}) {
  space.validate();
  if (trials < 1) throw InvalidArgument("random search needs at least one trial");
  Rng rng(seed);
  auto pick = [&rng](const auto& v) { return v[static_cast<std::size_t>(rng.below(v.size()))]; };
  SearchResult result;
  for (std::size_t i = 0; i < trials; ++i) {
    TrialParams p;
    p.tm = options.base;
    p.n_bins = pick(space.n_bins);
    p.tm.num_clauses = pick(space.num_clauses);
    p.tm.threshold = pick(space.threshold);
    p.tm.specificity = pick(space.specificity);
    p.tm.epochs = pick(space.epochs);
    p.tm.seed = derive_seed(seed, i);
    result.trials.push_back(run_trial(i, p, schema, train, validation, options.complexity_penalty));
    if (result.trials.back().objective > result.trials[result.best].objective) result.best = i;
  }
  return result;
}

}  // namespace tmrisk
