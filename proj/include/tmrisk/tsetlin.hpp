#pragma once

// Two-polarity Tsetlin machine for a binary outcome.
//
// Each clause owns one Tsetlin automaton per literal. An automaton with
// state in [1, 2N] selects INCLUDE when state > N. A clause is the
// conjunction of its included literals; positive clauses vote for
// recurrence, negative clauses against. The class sum is clamped to
// [-T, T] and ties predict recurrence.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tmrisk/error.hpp"
#include "tmrisk/literals.hpp"
#include "tmrisk/random.hpp"
#include "tmrisk/schema.hpp"

namespace tmrisk {

inline constexpr std::uint64_t kDefaultSeed = 20250607;

struct TMParams {
  int num_clauses = 80;  // half positive, half negative
  int threshold = 38;    // T
  double specificity = 4.0;  // s
  int epochs = 100;
  int states_per_action = 100;  // N
  // Weight per outcome, indexed by to_int(Outcome). Empty means balanced
  // weights n / (2 n_c) computed on the training split.
  std::optional<std::array<double, 2>> class_weights;
  std::uint64_t seed = kDefaultSeed;

  void validate() const {
    if (num_clauses <= 0 || num_clauses % 2 != 0)
      throw InvalidArgument("num_clauses must be a positive even integer, got " + std::to_string(num_clauses));
    if (threshold < 1) throw InvalidArgument("threshold T must be >= 1");
    if (!(specificity > 1.0) || !std::isfinite(specificity)) throw InvalidArgument("specificity s must be > 1");
    if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
    if (states_per_action < 1 || states_per_action > (1 << 29))
      throw InvalidArgument("states_per_action N out of range");
    if (class_weights) {
      for (double w : *class_weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("class weights must be finite and >= 0");
    }
  }

  friend bool operator==(const TMParams&, const TMParams&) = default;
};

enum class Polarity : std::int8_t { negative = -1, positive = 1 };
enum class EvalMode { train, infer };

class Clause {
 public:
  Clause(Polarity polarity, std::size_t literal_count, int states_per_action)
      : polarity_(polarity),
        n_(states_per_action),
        states_(literal_count, states_per_action),
        include_(LiteralVector::word_count(literal_count), 0) {}

  Polarity polarity() const noexcept { return polarity_; }
  int states_per_action() const noexcept { return n_; }
  std::size_t literal_count() const noexcept { return states_.size(); }
  std::size_t included_count() const noexcept { return included_; }
  bool empty() const noexcept { return included_ == 0; }

  int state(std::size_t lit) const { return states_.at(lit); }
  bool included(std::size_t lit) const noexcept { return states_[lit] > n_; }
  std::span<const int> states() const noexcept { return states_; }
  std::span<const std::uint64_t> include_mask() const noexcept { return include_; }

  std::vector<std::size_t> included_literals() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < states_.size(); ++i)
      if (included(i)) out.push_back(i);
    return out;
  }

  /// Saturating move toward INCLUDE.
  void increment(std::size_t lit) noexcept {
    int& s = states_[lit];
    if (s >= 2 * n_) return;
    ++s;
    if (s == n_ + 1) set_bit(lit, true);
  }

  /// Saturating move toward EXCLUDE.
  void decrement(std::size_t lit) noexcept {
    int& s = states_[lit];
    if (s <= 1) return;
    if (s == n_ + 1) set_bit(lit, false);
    --s;
  }

  void set_state(std::size_t lit, int value) {
    if (lit >= states_.size()) throw StructuralError("literal index out of range");
    if (value < 1 || value > 2 * n_) throw StructuralError("automaton state outside [1, 2N]");
    const bool was = included(lit);
    states_[lit] = value;
    if (was != included(lit)) set_bit(lit, !was);
  }

  friend bool operator==(const Clause& a, const Clause& b) {
    return a.polarity_ == b.polarity_ && a.n_ == b.n_ && a.states_ == b.states_;
  }

 private:
  void set_bit(std::size_t lit, bool on) noexcept {
    const auto mask = std::uint64_t{1} << (lit & 63);
    if (on) {
      include_[lit >> 6] |= mask;
      ++included_;
    } else {
      include_[lit >> 6] &= ~mask;
      --included_;
    }
  }

  Polarity polarity_;
  int n_;
  std::vector<int> states_;
  std::vector<std::uint64_t> include_;
  std::size_t included_ = 0;
};

/// Conjunction of the included literals. An empty clause fires while
/// training and never at inference.
inline bool clause_eval(const Clause& clause, const LiteralVector& x, EvalMode mode) {
  if (x.size() != clause.literal_count())
    throw StructuralError("clause expects " + std::to_string(clause.literal_count()) + " literals, input has " +
                          std::to_string(x.size()));
  if (clause.empty()) return mode == EvalMode::train;
  const auto inc = clause.include_mask();
  const auto bits = x.words();
  for (std::size_t w = 0; w < inc.size(); ++w)
    if (inc[w] & ~bits[w]) return false;
  return true;
}

class TsetlinMachine {
 public:
  TsetlinMachine(FeatureSchema schema, TMParams params) : schema_(std::move(schema)), params_(std::move(params)) {
    params_.validate();
    const std::size_t lits = schema_.literal_count();
    if (lits == 0) throw SchemaError("schema produces no literals");
    clauses_.reserve(static_cast<std::size_t>(params_.num_clauses));
    for (int j = 0; j < params_.num_clauses; ++j)
      clauses_.emplace_back(j % 2 == 0 ? Polarity::positive : Polarity::negative, lits, params_.states_per_action);
  }

  const FeatureSchema& schema() const noexcept { return schema_; }
  const TMParams& params() const noexcept { return params_; }
  TMParams& mutable_params() noexcept { return params_; }
  std::size_t literal_count() const noexcept { return schema_.literal_count(); }

  const std::vector<Clause>& clauses() const noexcept { return clauses_; }
  std::vector<Clause>& clauses() noexcept { return clauses_; }

  bool trained() const noexcept { return trained_; }
  void set_trained(bool t) noexcept { trained_ = t; }

  /// Total number of included literals across the clause bank.
  std::size_t complexity() const noexcept {
    std::size_t n = 0;
    for (const auto& c : clauses_) n += c.included_count();
    return n;
  }

  /// Weight of `o`; 1 when unresolved.
  double class_weight(Outcome o) const noexcept {
    return params_.class_weights ? (*params_.class_weights)[static_cast<std::size_t>(to_int(o))] : 1.0;
  }

  /// Free-form provenance carried through persistence verbatim.
  nlohmann::json metadata = nlohmann::json::object();

  friend bool operator==(const TsetlinMachine& a, const TsetlinMachine& b) {
    return a.params_ == b.params_ && a.schema_ == b.schema_ && a.clauses_ == b.clauses_ && a.trained_ == b.trained_;
  }

 private:
  FeatureSchema schema_;
  TMParams params_;
  std::vector<Clause> clauses_;
  bool trained_ = false;
};

/// (firing positive clauses) - (firing negative clauses), clamped to [-T, T].
inline int class_sum(const TsetlinMachine& model, const LiteralVector& x, EvalMode mode) {
  if (x.size() != model.literal_count())
    throw StructuralError("model expects " + std::to_string(model.literal_count()) + " literals, input has " +
                          std::to_string(x.size()));
  int sum = 0;
  for (const auto& c : model.clauses())
    if (clause_eval(c, x, mode)) sum += static_cast<int>(c.polarity());
  const int t = model.params().threshold;
  return std::clamp(sum, -t, t);
}

inline Outcome predict(const TsetlinMachine& model, const LiteralVector& x) {
  if (!model.trained()) throw InvalidArgument("predict called on an untrained model");
  return outcome_from_bool(class_sum(model, x, EvalMode::infer) >= 0);
}

/// Reinforces recognition of the current input. `draw` yields uniform
/// numbers in [0, 1); exactly one is consumed per literal, in index order.
/// Fired clause: true literals step toward INCLUDE with probability
/// (s-1)/s, false excluded literals toward EXCLUDE with probability 1/s.
/// Clause not fired: every literal steps toward EXCLUDE with probability 1/s.
template <std::invocable Draw>
void type_i_feedback(Clause& clause, const LiteralVector& x, double s, Draw&& draw) {
  const bool fired = clause_eval(clause, x, EvalMode::train);
  const double p_include = (s - 1.0) / s;
  const double p_exclude = 1.0 / s;
  for (std::size_t lit = 0; lit < clause.literal_count(); ++lit) {
    const double u = draw();
    if (!fired) {
      if (u < p_exclude) clause.decrement(lit);
    } else if (x[lit]) {
      if (u < p_include) clause.increment(lit);
    } else if (!clause.included(lit) && u < p_exclude) {
      clause.decrement(lit);
    }
  }
}

inline void type_i_feedback(Clause& clause, const LiteralVector& x, double s, Rng& rng) {
  type_i_feedback(clause, x, s, [&rng] { return rng.uniform(); });
}

/// Pushes excluded false literals of a wrongly firing clause toward
/// INCLUDE so the clause stops matching this input. Deterministic.
inline void type_ii_feedback(Clause& clause, const LiteralVector& x) {
  if (!clause_eval(clause, x, EvalMode::train)) return;
  for (std::size_t lit = 0; lit < clause.literal_count(); ++lit)
    if (!x[lit] && !clause.included(lit)) clause.increment(lit);
}

/// Probability that a clause receives feedback for one sample.
inline double feedback_probability(Outcome target, int clamped_sum, int threshold, double weight) {
  const double t = threshold;
  const double v = clamped_sum;
  const double base = target == Outcome::recurrence ? (t - v) / (2.0 * t) : (t + v) / (2.0 * t);
  return std::min(1.0, weight * base);
}

/// One pass over `data` in a seeded shuffled order.
inline void fit_epoch(TsetlinMachine& model, std::span<const Sample> data, Rng& rng) {
  if (data.empty()) throw InvalidArgument("fit_epoch needs at least one sample");
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));

  const int t = model.params().threshold;
  const double s = model.params().specificity;
  for (std::size_t idx : order) {
    const Sample& sample = data[idx];
    const int v = class_sum(model, sample.x, EvalMode::train);
    const double p = feedback_probability(sample.label, v, t, model.class_weight(sample.label));
    const Polarity target =
        sample.label == Outcome::recurrence ? Polarity::positive : Polarity::negative;
    for (auto& clause : model.clauses()) {
      if (!(rng.uniform() < p)) continue;
      if (clause.polarity() == target)
        type_i_feedback(clause, sample.x, s, rng);
      else
        type_ii_feedback(clause, sample.x);
    }
  }
}

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_accuracy = 0.0;
  std::optional<double> holdout_accuracy;
};

struct LearningCurve {
  std::vector<EpochRecord> epochs;
};

inline double accuracy(const TsetlinMachine& model, std::span<const Sample> data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : data) hits += predict(model, s.x) == s.label;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

/// n / (2 n_c) per class; a class absent from `data` gets weight 1.
inline std::array<double, 2> balanced_class_weights(std::span<const Sample> data) {
  std::array<std::size_t, 2> counts{0, 0};
  for (const auto& s : data) ++counts[static_cast<std::size_t>(to_int(s.label))];
  std::array<double, 2> w{1.0, 1.0};
  for (std::size_t c = 0; c < 2; ++c)
    if (counts[c] > 0) w[c] = static_cast<double>(data.size()) / (2.0 * static_cast<double>(counts[c]));
  return w;
}

struct FitResult {
  TsetlinMachine model;
  LearningCurve curve;
};

/// Trains a fresh machine for params.epochs epochs from an RNG seeded with
/// params.seed, recording train (and optional holdout) accuracy after
/// every epoch. Unset class weights are resolved from `train` and stored
/// in the returned model's params.
inline FitResult fit(const FeatureSchema& schema, std::span<const Sample> train,
                     std::optional<std::span<const Sample>> holdout, TMParams params) {
  params.validate();
  if (params.epochs > 0 && train.empty()) throw InvalidArgument("training data is empty");
  for (const auto& s : train)
    if (s.x.size() != schema.literal_count())
      throw StructuralError("training sample width does not match the schema");
  if (!params.class_weights) params.class_weights = balanced_class_weights(train);

  FitResult result{TsetlinMachine(schema, params), {}};
  result.model.set_trained(true);
  Rng rng(params.seed);
  for (int e = 1; e <= params.epochs; ++e) {
    fit_epoch(result.model, train, rng);
    EpochRecord rec{e, accuracy(result.model, train), std::nullopt};
    if (holdout) rec.holdout_accuracy = accuracy(result.model, *holdout);
    result.curve.epochs.push_back(rec);
  }
  return result;
}

}  // namespace tmrisk
