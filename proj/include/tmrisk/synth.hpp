#pragma once

// Synthetic cohorts with planted ground-truth rules. Labels are a
// deterministic function of the binarized features (highest-weight
// matching rule, else a background label), class balance is steered by
// per-class quotas, and independent label noise is applied last.

#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmrisk/csv.hpp"
#include "tmrisk/random.hpp"
#include "tmrisk/schema.hpp"

namespace tmrisk {

struct PlantedRule {
  std::string name;
  std::vector<std::string> predicates;  // literal texts as rendered by the schema
  Outcome target = Outcome::recurrence;
  double weight = 1.0;
};

/// A rule resolved to literal indices of a particular schema.
struct CompiledRule {
  std::string name;
  std::vector<std::size_t> literals;
  Outcome target = Outcome::recurrence;
  double weight = 1.0;

  bool matches(const LiteralVector& x) const {
    for (auto lit : literals)
      if (!x.at(lit)) return false;
    return true;
  }
};

inline std::vector<CompiledRule> compile_rules(std::span<const PlantedRule> rules, const FeatureSchema& schema) {
  std::vector<CompiledRule> out;
  for (const auto& r : rules) {
    if (!std::isfinite(r.weight)) throw InvalidArgument("rule '" + r.name + "': non-finite weight");
    CompiledRule c{r.name, {}, r.target, r.weight};
    for (const auto& p : r.predicates) {
      try {
        c.literals.push_back(schema.require_predicate(p));
      } catch (const SchemaError& e) {
        throw SchemaError("rule '" + r.name + "': " + e.what());
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// Noise-free label: the highest-weight matching rule decides, a weight tie
/// between opposite targets goes to recurrence, and no match yields
/// `background`.
inline Outcome oracle_label(const LiteralVector& x, std::span<const CompiledRule> rules, Outcome background) {
  std::optional<double> best;
  Outcome label = background;
  for (const auto& r : rules) {
    if (!r.matches(x)) continue;
    if (!best || r.weight > *best) {
      best = r.weight;
      label = r.target;
    } else if (r.weight == *best && r.target == Outcome::recurrence) {
      label = Outcome::recurrence;
    }
  }
  return label;
}

struct DiscreteSampler {
  std::vector<double> values;
  std::vector<double> weights;
};
struct UniformSampler {
  double low = 0.0;
  double high = 1.0;
};
struct CategoricalSampler {
  std::vector<std::string> labels;
  std::vector<double> weights;
};
struct BernoulliSampler {
  double p = 0.5;
};
using Sampler = std::variant<DiscreteSampler, UniformSampler, CategoricalSampler, BernoulliSampler>;

namespace detail {

inline std::size_t weighted_index(std::span<const double> weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

inline void check_weights(std::span<const double> weights, std::size_t n, const std::string& what) {
  if (weights.size() != n || n == 0) throw InvalidArgument(what + ": weights must match values");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument(what + ": weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument(what + ": weights sum to zero");
}

}  // namespace detail

inline FeatureValue draw_value(const Sampler& sampler, Rng& rng) {
  if (const auto* d = std::get_if<DiscreteSampler>(&sampler)) return d->values[detail::weighted_index(d->weights, rng)];
  if (const auto* u = std::get_if<UniformSampler>(&sampler)) return u->low + (u->high - u->low) * rng.uniform();
  if (const auto* c = std::get_if<CategoricalSampler>(&sampler)) return c->labels[detail::weighted_index(c->weights, rng)];
  return rng.bernoulli(std::get<BernoulliSampler>(sampler).p);
}

inline nlohmann::json sampler_to_json(const Sampler& s) {
  nlohmann::json j;
  if (const auto* d = std::get_if<DiscreteSampler>(&s)) {
    j = {{"type", "discrete"}, {"values", d->values}, {"weights", d->weights}};
  } else if (const auto* u = std::get_if<UniformSampler>(&s)) {
    j = {{"type", "uniform"}, {"low", u->low}, {"high", u->high}};
  } else if (const auto* c = std::get_if<CategoricalSampler>(&s)) {
    j = {{"type", "categorical"}, {"labels", c->labels}, {"weights", c->weights}};
  } else {
    j = {{"type", "bernoulli"}, {"p", std::get<BernoulliSampler>(s).p}};
  }
  return j;
}

inline Sampler sampler_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "discrete") return DiscreteSampler{j.at("values"), j.at("weights")};
  if (type == "uniform") return UniformSampler{j.at("low"), j.at("high")};
  if (type == "categorical") return CategoricalSampler{j.at("labels"), j.at("weights")};
  if (type == "bernoulli") return BernoulliSampler{j.at("p")};
  throw InvalidArgument("unknown sampler type '" + type + "'");
}

struct CohortConfig {
  std::size_t n = 330;
  double positive_fraction = 0.40;  // target after label noise
  double noise = 0.05;
  std::uint64_t seed = 7;
  std::vector<PlantedRule> rules;
  std::map<std::string, Sampler> samplers;  // one per schema feature
  // Columns outside the schema (e.g. EORTC factors), emitted verbatim.
  std::vector<std::pair<std::string, Sampler>> extra_columns;
  std::optional<Outcome> background;  // unset: chosen to steer toward the target

  void validate(const FeatureSchema& schema) const {
    if (n < 2) throw InvalidArgument("cohort size n must be >= 2");
    if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0))
      throw InvalidArgument("positive fraction must lie in [0, 1]");
    if (!(noise >= 0.0 && noise < 1.0)) throw InvalidArgument("noise rate must lie in [0, 1)");
    for (const auto& spec : schema.specs()) {
      auto it = samplers.find(spec.name);
      if (it == samplers.end()) throw InvalidArgument("no sampler for feature '" + spec.name + "'");
      check_sampler(spec, it->second);
    }
    for (const auto& [name, s] : samplers)
      if (!schema.find_feature(name)) throw InvalidArgument("sampler for unknown feature '" + name + "'");
    for (const auto& [name, s] : extra_columns) {
      if (schema.find_feature(name) || name == "label" || name == "id")
        throw InvalidArgument("extra column '" + name + "' clashes with a reserved or schema column");
      check_sampler(FeatureSpec{name, FeatureKind::binary, {}, {}, {}, {}}, s, true);
    }
  }

 private:
  static void check_sampler(const FeatureSpec& spec, const Sampler& s, bool any_kind = false) {
    const std::string what = "sampler for '" + spec.name + "'";
    if (const auto* d = std::get_if<DiscreteSampler>(&s)) {
      detail::check_weights(d->weights, d->values.size(), what);
      for (double v : d->values)
        if (!std::isfinite(v)) throw InvalidArgument(what + ": non-finite value");
      if (!any_kind && spec.kind != FeatureKind::continuous) throw InvalidArgument(what + ": feature is not continuous");
    } else if (const auto* u = std::get_if<UniformSampler>(&s)) {
      if (!(u->high >= u->low) || !std::isfinite(u->low) || !std::isfinite(u->high))
        throw InvalidArgument(what + ": bad uniform range");
      if (!any_kind && spec.kind != FeatureKind::continuous) throw InvalidArgument(what + ": feature is not continuous");
    } else if (const auto* c = std::get_if<CategoricalSampler>(&s)) {
      detail::check_weights(c->weights, c->labels.size(), what);
      if (!any_kind) {
        if (spec.kind != FeatureKind::categorical) throw InvalidArgument(what + ": feature is not categorical");
        for (const auto& l : c->labels) one_hot_encode(l, spec.categories, spec.name);
      }
    } else {
      const double p = std::get<BernoulliSampler>(s).p;
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(what + ": probability outside [0, 1]");
      if (!any_kind && spec.kind != FeatureKind::binary) throw InvalidArgument(what + ": feature is not binary");
    }
  }
};

struct Cohort {
  std::vector<PatientRecord> records;  // labels are the noisy labels
  std::vector<Outcome> clean_labels;   // oracle labels before noise
  CsvTable table;                      // id, schema features, extra columns, label
  Outcome background = Outcome::no_recurrence;
  double positive_fraction = 0.0;

  std::size_t positives() const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.label == Outcome::recurrence;
    return n;
  }
};

namespace detail {

inline std::vector<FeatureValue> draw_record(const FeatureSchema& schema, const CohortConfig& config, Rng& rng) {
  std::vector<FeatureValue> values;
  values.reserve(schema.specs().size());
  for (const auto& spec : schema.specs()) values.push_back(draw_value(config.samplers.at(spec.name), rng));
  return values;
}

}  // namespace detail

/// Draws a cohort. Pre-noise class quotas are set so that the expected
/// post-noise positive fraction equals the target; candidates are drawn
/// until both quotas fill. Throws with the observed natural positive rate
/// when one class cannot be produced.
inline Cohort generate_cohort(const FeatureSchema& schema, const CohortConfig& config) {
  config.validate(schema);
  const auto rules = compile_rules(config.rules, schema);

  Cohort cohort;
  if (config.background) {
    cohort.background = *config.background;
  } else {
    // Pilot draw on an independent stream: pick the background label whose
    // natural positive rate lands closer to the target.
    Rng pilot(derive_seed(config.seed, 1));
    std::size_t pos_if_neg = 0, pos_if_pos = 0;
    constexpr std::size_t kPilot = 2000;
    for (std::size_t i = 0; i < kPilot; ++i) {
      const auto x = binarize_record({detail::draw_record(schema, config, pilot), std::nullopt}, schema);
      pos_if_neg += oracle_label(x, rules, Outcome::no_recurrence) == Outcome::recurrence;
      pos_if_pos += oracle_label(x, rules, Outcome::recurrence) == Outcome::recurrence;
    }
    const double a = static_cast<double>(pos_if_neg) / kPilot;
    const double b = static_cast<double>(pos_if_pos) / kPilot;
    cohort.background = std::abs(b - config.positive_fraction) < std::abs(a - config.positive_fraction)
                            ? Outcome::recurrence
                            : Outcome::no_recurrence;
  }

  double clean_fraction = config.positive_fraction;
  if (config.noise < 0.5 && config.noise > 0.0)
    clean_fraction = std::clamp((config.positive_fraction - config.noise) / (1.0 - 2.0 * config.noise), 0.0, 1.0);
  const auto want_pos = static_cast<std::size_t>(std::llround(clean_fraction * static_cast<double>(config.n)));
  const std::size_t want_neg = config.n - want_pos;

  Rng rng(config.seed);
  std::size_t have_pos = 0, have_neg = 0, drawn = 0, drawn_pos = 0;
  const std::size_t max_draws = 1000 * config.n + 100000;
  while (have_pos < want_pos || have_neg < want_neg) {
    if (drawn >= max_draws) {
      const double rate = drawn ? static_cast<double>(drawn_pos) / static_cast<double>(drawn) : 0.0;
      throw InvalidArgument("target positive fraction " + format_number(config.positive_fraction) +
                            " is unsatisfiable under the planted rules; achieved fraction " + format_number(rate));
    }
    auto values = detail::draw_record(schema, config, rng);
    const auto x = binarize_record({values, std::nullopt}, schema);
    const Outcome label = oracle_label(x, rules, cohort.background);
    ++drawn;
    drawn_pos += label == Outcome::recurrence;
    if (label == Outcome::recurrence ? have_pos >= want_pos : have_neg >= want_neg) continue;
    (label == Outcome::recurrence ? have_pos : have_neg)++;
    cohort.records.push_back({std::move(values), label});
    cohort.clean_labels.push_back(label);
  }

  for (auto& r : cohort.records)
    if (rng.bernoulli(config.noise)) r.label = flip(*r.label);

  cohort.table.header.push_back("id");
  for (const auto& spec : schema.specs()) cohort.table.header.push_back(spec.name);
  for (const auto& [name, s] : config.extra_columns) cohort.table.header.push_back(name);
  cohort.table.header.push_back("label");
  for (std::size_t i = 0; i < cohort.records.size(); ++i) {
    std::vector<std::string> row;
    row.push_back(std::to_string(i));
    for (const auto& v : cohort.records[i].values) row.push_back(value_to_text(v));
    for (const auto& [name, s] : config.extra_columns) row.push_back(value_to_text(draw_value(s, rng)));
    row.push_back(std::to_string(to_int(*cohort.records[i].label)));
    cohort.table.rows.push_back(std::move(row));
  }
  cohort.positive_fraction = static_cast<double>(cohort.positives()) / static_cast<double>(config.n);
  return cohort;
}

/// Planted analogues of the published clauses: the two-factor recurrence
/// rule, the EQ-5D band rule, and the protective consultant rule.
inline std::vector<PlantedRule> photo_like_rules() {
  return {
      {"C149", {"HospitalStay > 3 days", "TumourNumber > 3"}, Outcome::recurrence, 2.0},
      {"C73", {"EQ5DScore > 0.41", "EQ5DScore ≤ 0.49", "SurgeonGrade ≠ Consultant"}, Outcome::recurrence, 1.0},
      {"C63", {"SurgeonGrade = Consultant"}, Outcome::no_recurrence, 1.0},
  };
}

/// Default cohort matching the photo-like schema, including the columns the
/// EORTC scorer reads.
inline CohortConfig photo_like_cohort_config(std::uint64_t seed = 7) {
  CohortConfig c;
  c.seed = seed;
  c.rules = photo_like_rules();
  const std::vector<double> counts{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  c.samplers["HospitalStay"] = DiscreteSampler{counts, {15, 20, 15, 15, 10, 8, 7, 5, 3, 2}};
  c.samplers["TumourNumber"] = DiscreteSampler{counts, {25, 15, 10, 15, 12, 10, 6, 4, 2, 1}};
  c.samplers["EQ5DScore"] = UniformSampler{0.2, 1.0};
  c.samplers["SurgeonGrade"] = CategoricalSampler{{"Consultant", "Registrar", "Other"}, {45, 35, 20}};
  c.samplers["SmokingStatus"] = CategoricalSampler{{"never", "former", "current"}, {40, 35, 25}};
  c.extra_columns = {
      {"TumourSize", DiscreteSampler{{0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 5, 6}, {8, 14, 16, 16, 12, 10, 8, 7, 5, 4}}},
      {"PriorRecurrence", CategoricalSampler{{"primary", "<=1/yr", ">1/yr"}, {60, 28, 12}}},
      {"TCategory", CategoricalSampler{{"Ta", "T1"}, {70, 30}}},
      {"CIS", BernoulliSampler{0.1}},
      {"Grade", CategoricalSampler{{"G1", "G2", "G3"}, {35, 40, 25}}},
  };
  return c;
}

inline nlohmann::json cohort_config_to_json(const CohortConfig& c, const FeatureSchema& schema) {
  nlohmann::json j;
  j["n"] = c.n;
  j["positive_fraction"] = c.positive_fraction;
  j["noise"] = c.noise;
  j["seed"] = c.seed;
  if (c.background) j["background"] = to_int(*c.background);
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : c.rules) {
    nlohmann::json rj{{"name", r.name}, {"predicates", r.predicates}, {"target", to_int(r.target)}, {"weight", r.weight}};
    std::vector<std::size_t> lits;
    for (const auto& p : r.predicates) lits.push_back(schema.require_predicate(p));
    rj["literals"] = lits;
    rules.push_back(std::move(rj));
  }
  j["rules"] = std::move(rules);
  nlohmann::json samplers = nlohmann::json::object();
  for (const auto& [name, s] : c.samplers) samplers[name] = sampler_to_json(s);
  j["samplers"] = std::move(samplers);
  nlohmann::json extras = nlohmann::json::array();
  for (const auto& [name, s] : c.extra_columns) extras.push_back({{"name", name}, {"sampler", sampler_to_json(s)}});
  j["extra_columns"] = std::move(extras);
  return j;
}

/// Inverse of cohort_config_to_json; absent fields keep the values of `base`.
inline CohortConfig cohort_config_from_json(const nlohmann::json& j, CohortConfig base = {}) {
  try {
    if (j.contains("n")) base.n = j["n"].get<std::size_t>();
    if (j.contains("positive_fraction")) base.positive_fraction = j["positive_fraction"].get<double>();
    if (j.contains("noise")) base.noise = j["noise"].get<double>();
    if (j.contains("seed")) base.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("background")) base.background = j["background"].get<int>() ? Outcome::recurrence : Outcome::no_recurrence;
    if (j.contains("rules")) {
      base.rules.clear();
      for (const auto& r : j["rules"])
        base.rules.push_back({r.at("name").get<std::string>(), r.at("predicates").get<std::vector<std::string>>(),
                              r.at("target").get<int>() ? Outcome::recurrence : Outcome::no_recurrence,
                              r.value("weight", 1.0)});
    }
    if (j.contains("samplers")) {
      base.samplers.clear();
      for (const auto& [name, s] : j["samplers"].items()) base.samplers[name] = sampler_from_json(s);
    }
    if (j.contains("extra_columns")) {
      base.extra_columns.clear();
      for (const auto& e : j["extra_columns"])
        base.extra_columns.emplace_back(e.at("name").get<std::string>(), sampler_from_json(e.at("sampler")));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("cohort config JSON: ") + e.what());
  }
  return base;
}

}  // namespace tmrisk
