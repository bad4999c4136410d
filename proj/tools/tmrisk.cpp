#include <iostream>

#include <CLI11.hpp>

#include "tmrisk/commands.hpp"

namespace {

using tmrisk::cli::RunConfig;

void add_shared(CLI::App* app, RunConfig& cfg) {
  app->add_option("--schema", cfg.schema, "feature schema JSON (default: built-in cohort schema)");
  app->add_option("--out", cfg.out, "output directory")->capture_default_str();
  app->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
}

void add_data(CLI::App* app, RunConfig& cfg, bool required = true) {
  auto* o = app->add_option("--data", cfg.data, "data CSV with a label column");
  if (required) o->required();
  app->add_option("--test-frac", cfg.test_fraction, "held-out fraction of the stratified split")->capture_default_str();
}

void add_tm(CLI::App* app, RunConfig& cfg) {
  app->add_option("--clauses", cfg.tm.num_clauses, "total clauses (even)")->capture_default_str();
  app->add_option("--T", cfg.tm.threshold, "vote threshold T")->capture_default_str();
  app->add_option("--s", cfg.tm.specificity, "specificity s")->capture_default_str();
  app->add_option("--epochs", cfg.tm.epochs, "training epochs")->capture_default_str();
  app->add_option("--states", cfg.tm.states_per_action, "automaton states per action N")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretable Tsetlin machine toolkit for recurrence risk"};
  app.set_version_flag("--version", std::string(tmrisk::kVersion));
  app.require_subcommand(1);
  RunConfig cfg;

  auto* gen = app.add_subcommand("generate", "write a synthetic cohort CSV and manifest");
  add_shared(gen, cfg);
  gen->add_option("--n", cfg.n, "number of records")->capture_default_str();
  gen->add_option("--pos-frac", cfg.positive_fraction, "target positive fraction")->capture_default_str();
  gen->add_option("--noise", cfg.noise, "label flip probability")->capture_default_str();
  gen->add_option("--config", cfg.cohort_config, "cohort config JSON (rules, samplers)");

  auto* train = app.add_subcommand("train", "split, train a Tsetlin machine, write model and curve");
  add_shared(train, cfg);
  add_data(train, cfg);
  add_tm(train, cfg);

  auto* eval = app.add_subcommand("evaluate", "compare TM, logistic regression and EORTC on one split");
  add_shared(eval, cfg);
  add_data(eval, cfg);
  eval->add_option("--model", cfg.model, "trained TM model JSON (needed for the tm model)");
  eval->add_option("--models", cfg.models, "models to compare: tm lr eortc")->delimiter(',')->capture_default_str();
  eval->add_option("--eortc-threshold", cfg.eortc_threshold, "lowest risk group predicted as recurrence")
      ->check(CLI::IsMember({"0", "1-4", "5-9", "10-17"}))
      ->capture_default_str();
  eval->add_option("--eortc-columns", cfg.eortc_columns, "JSON map from EORTC factors to CSV columns");
  eval->add_flag("--cv", cfg.cross_validate, "stratified k-fold CV over the training split");
  eval->add_option("--folds", cfg.folds, "folds for --cv")->capture_default_str();
  eval->add_option("--lambda", cfg.lr.l2, "logistic regression L2 strength")->capture_default_str();
  eval->add_option("--lr-iterations", cfg.lr.iterations, "logistic regression iterations")->capture_default_str();

  auto* explain = app.add_subcommand("explain", "export rules, heatmap data and patient explanations");
  add_shared(explain, cfg);
  add_data(explain, cfg);
  explain->add_option("--model", cfg.model, "trained TM model JSON")->required();
  explain->add_option("--patient", cfg.patient, "row to explain");
  explain->add_option("--top-k", cfg.top_k, "clauses in the heatmap")->capture_default_str();
  explain->add_flag("--test-split", cfg.explain_test_split, "use only the held-out rows");

  auto* tune = app.add_subcommand("tune", "seeded random search over TM hyperparameters");
  add_shared(tune, cfg);
  add_data(tune, cfg);
  add_tm(tune, cfg);
  tune->add_option("--trials", cfg.trials, "number of trials")->capture_default_str();
  tune->add_option("--penalty", cfg.complexity_penalty, "complexity penalty weight")->capture_default_str();
  tune->add_option("--space", cfg.search_space, "search space JSON");
  tune->add_flag("--retrain", cfg.retrain, "retrain the winner on the full training split");

  CLI11_PARSE(app, argc, argv);
  cfg.subcommand = app.get_subcommands().front()->get_name();
  try {
    tmrisk::cli::run(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
