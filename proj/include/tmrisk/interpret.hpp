#pragma once

// Clause-level explanation: readable rules, per-patient activation
// matrices, and importance by firing-frequency difference between
// recurrent and non-recurrent patients.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmrisk/csv.hpp"
#include "tmrisk/tsetlin.hpp"

namespace tmrisk {

inline std::string_view outcome_name(Outcome o) {
  return o == Outcome::recurrence ? "Recurrence" : "No Recurrence";
}

struct ReadableClause {
  std::size_t id = 0;
  Polarity polarity = Polarity::positive;
  std::vector<std::size_t> literals;     // included literal indices, ascending
  std::vector<std::string> predicates;   // one text per included literal
  std::vector<std::size_t> condensed_literals;
  std::vector<std::string> condensed;    // logically equivalent, implied literals dropped
  std::size_t fire_count = 0;            // on the reference data, inference mode

  Outcome votes_for() const noexcept {
    return polarity == Polarity::positive ? Outcome::recurrence : Outcome::no_recurrence;
  }

  /// "IF A AND B THEN Recurrence", from the condensed predicates.
  std::string rule_text() const {
    std::string out = "IF ";
    if (condensed.empty()) {
      out += "⊤";
    } else {
      for (std::size_t i = 0; i < condensed.size(); ++i) out += (i ? " AND " : "") + condensed[i];
    }
    out += " THEN ";
    out += outcome_name(votes_for());
    if (condensed.empty()) out += " (empty clause, never fires at inference)";
    return out;
  }
};

/// Drops literals implied by others in the same conjunction: for a
/// thermometer feature only the tightest "> c" and "≤ c" survive, and a
/// one-hot "= a" makes every "≠ b" of that feature redundant. A literal
/// together with its own negation is left as is.
inline std::vector<std::size_t> condense_literals(const FeatureSchema& schema, std::span<const std::size_t> literals) {
  const std::size_t b = schema.raw_bit_count();
  std::vector<bool> keep(literals.size(), true);
  for (std::size_t i = 0; i < literals.size(); ++i) {
    const std::size_t li = literals[i];
    const bool neg_i = li >= b;
    const auto& oi = schema.origin(li % b);
    const auto& spec = schema.specs()[oi.feature];
    for (std::size_t j = 0; j < literals.size() && keep[i]; ++j) {
      if (i == j) continue;
      const std::size_t lj = literals[j];
      const bool neg_j = lj >= b;
      const auto& oj = schema.origin(lj % b);
      if (oj.feature != oi.feature) continue;
      if (spec.kind == FeatureKind::continuous && neg_i == neg_j) {
        // value > c_j implies value > c_i when c_j > c_i; value <= c_j
        // implies value <= c_i when c_j < c_i.
        if (!neg_i && oj.offset > oi.offset) keep[i] = false;
        if (neg_i && oj.offset < oi.offset) keep[i] = false;
      } else if (spec.kind == FeatureKind::categorical && neg_i && !neg_j && oj.offset != oi.offset) {
        keep[i] = false;
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < literals.size(); ++i)
    if (keep[i]) out.push_back(literals[i]);
  return out;
}

inline std::string literal_text_checked(const FeatureSchema& schema, std::size_t lit) {
  const std::size_t raw = lit % schema.raw_bit_count();
  if (raw >= schema.provenance().size() || schema.provenance()[raw].empty())
    throw SchemaError("no provenance text for bit " + std::to_string(raw));
  return schema.literal_text(lit);
}

inline ReadableClause readable_clause(const Clause& clause, std::size_t id, const FeatureSchema& schema) {
  ReadableClause rc;
  rc.id = id;
  rc.polarity = clause.polarity();
  rc.literals = clause.included_literals();
  for (auto lit : rc.literals) rc.predicates.push_back(literal_text_checked(schema, lit));
  rc.condensed_literals = condense_literals(schema, rc.literals);
  for (auto lit : rc.condensed_literals) rc.condensed.push_back(literal_text_checked(schema, lit));
  return rc;
}

/// One readable entry per clause. Fire counts are filled from `reference`
/// when given.
inline std::vector<ReadableClause> extract_rules(const TsetlinMachine& model, const FeatureSchema& schema,
                                                 std::span<const Sample> reference = {}) {
  if (!model.trained()) throw InvalidArgument("extract_rules needs a trained model");
  if (schema.literal_count() != model.literal_count())
    throw StructuralError("schema has " + std::to_string(schema.literal_count()) + " literals, model has " +
                          std::to_string(model.literal_count()));
  std::vector<ReadableClause> out;
  out.reserve(model.clauses().size());
  for (std::size_t c = 0; c < model.clauses().size(); ++c) {
    auto rc = readable_clause(model.clauses()[c], c, schema);
    for (const auto& s : reference) rc.fire_count += clause_eval(model.clauses()[c], s.x, EvalMode::infer);
    out.push_back(std::move(rc));
  }
  return out;
}

/// Patients x clauses firing record at inference, with true and predicted
/// labels per row.
class ClauseActivationMatrix {
 public:
  ClauseActivationMatrix() = default;
  ClauseActivationMatrix(std::size_t patients, std::size_t clauses)
      : patients_(patients), clauses_(clauses), cells_(patients * clauses, 0),
        true_labels_(patients), predicted_(patients) {}

  std::size_t patients() const noexcept { return patients_; }
  std::size_t clauses() const noexcept { return clauses_; }
  bool fired(std::size_t p, std::size_t c) const { return cells_.at(p * clauses_ + c) != 0; }
  void set_fired(std::size_t p, std::size_t c, bool v) { cells_.at(p * clauses_ + c) = v; }
  Outcome true_label(std::size_t p) const { return true_labels_.at(p); }
  Outcome predicted_label(std::size_t p) const { return predicted_.at(p); }
  void set_labels(std::size_t p, Outcome truth, Outcome predicted) {
    true_labels_.at(p) = truth;
    predicted_.at(p) = predicted;
  }

 private:
  std::size_t patients_ = 0;
  std::size_t clauses_ = 0;
  std::vector<std::uint8_t> cells_;
  std::vector<Outcome> true_labels_;
  std::vector<Outcome> predicted_;
};

inline ClauseActivationMatrix activation_matrix(const TsetlinMachine& model, std::span<const Sample> data) {
  ClauseActivationMatrix m(data.size(), model.clauses().size());
  for (std::size_t p = 0; p < data.size(); ++p) {
    int sum = 0;
    for (std::size_t c = 0; c < model.clauses().size(); ++c) {
      const auto& clause = model.clauses()[c];
      const bool f = clause_eval(clause, data[p].x, EvalMode::infer);
      m.set_fired(p, c, f);
      if (f) sum += static_cast<int>(clause.polarity());
    }
    if (!model.trained()) throw InvalidArgument("activation_matrix needs a trained model");
    const int t = model.params().threshold;
    m.set_labels(p, data[p].label, outcome_from_bool(std::clamp(sum, -t, t) >= 0));
  }
  return m;
}

struct ClauseImportance {
  std::size_t clause = 0;
  double rate_recurrent = 0.0;
  double rate_non_recurrent = 0.0;
  double importance = 0.0;  // rate_recurrent - rate_non_recurrent
};

/// Importance per clause, ranked by descending |importance| with ties
/// broken by clause id.
inline std::vector<ClauseImportance> clause_importance(const ClauseActivationMatrix& m) {
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t p = 0; p < m.patients(); ++p) (m.true_label(p) == Outcome::recurrence ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw InvalidArgument("clause importance needs patients of both classes");
  std::vector<ClauseImportance> out(m.clauses());
  for (std::size_t c = 0; c < m.clauses(); ++c) {
    std::size_t f_pos = 0, f_neg = 0;
    for (std::size_t p = 0; p < m.patients(); ++p) {
      if (!m.fired(p, c)) continue;
      (m.true_label(p) == Outcome::recurrence ? f_pos : f_neg)++;
    }
    auto& ci = out[c];
    ci.clause = c;
    ci.rate_recurrent = static_cast<double>(f_pos) / static_cast<double>(n_pos);
    ci.rate_non_recurrent = static_cast<double>(f_neg) / static_cast<double>(n_neg);
    ci.importance = ci.rate_recurrent - ci.rate_non_recurrent;
  }
  std::stable_sort(out.begin(), out.end(), [](const ClauseImportance& a, const ClauseImportance& b) {
    return std::abs(a.importance) > std::abs(b.importance);
  });
  return out;
}

/// Heatmap data behind the clause-activation figure.
///
/// CSV: one row per patient in matrix order; columns true_label,
/// predicted_label, then one 0/1 column per top clause ("C<id>") in
/// descending |importance|. Legend JSON lists the same clauses with rank,
/// rule text, predicates and firing rates.
inline void export_heatmap_data(const ClauseActivationMatrix& m, std::span<const ReadableClause> rules,
                                std::size_t top_k, const std::filesystem::path& csv_path,
                                const std::filesystem::path& legend_path,
                                const std::vector<std::string>& header_comments = {},
                                const nlohmann::json& provenance = nlohmann::json::object()) {
  if (top_k < 1) throw InvalidArgument("top_k must be >= 1");
  if (m.patients() == 0 || m.clauses() == 0) throw InvalidArgument("activation matrix is empty");
  if (rules.size() != m.clauses()) throw StructuralError("rule list does not match matrix columns");
  const auto ranked = clause_importance(m);
  const std::size_t k = std::min(top_k, ranked.size());

  CsvTable table;
  table.header = {"true_label", "predicted_label"};
  for (std::size_t r = 0; r < k; ++r) table.header.push_back("C" + std::to_string(ranked[r].clause));
  for (std::size_t p = 0; p < m.patients(); ++p) {
    std::vector<std::string> row{std::to_string(to_int(m.true_label(p))), std::to_string(to_int(m.predicted_label(p)))};
    for (std::size_t r = 0; r < k; ++r) row.push_back(m.fired(p, ranked[r].clause) ? "1" : "0");
    table.rows.push_back(std::move(row));
  }
  auto comments = header_comments;
  comments.push_back("columns: true_label, predicted_label (1 = recurrence), then firing bits of the top " +
                     std::to_string(k) + " clauses by |importance|");
  write_csv_file(csv_path, table, comments);

  nlohmann::json legend;
  legend["provenance"] = provenance;
  legend["top_k"] = k;
  nlohmann::json clauses = nlohmann::json::array();
  for (std::size_t r = 0; r < k; ++r) {
    const auto& imp = ranked[r];
    const auto& rule = rules[imp.clause];
    clauses.push_back({{"rank", r + 1},
                       {"clause", imp.clause},
                       {"column", "C" + std::to_string(imp.clause)},
                       {"polarity", rule.polarity == Polarity::positive ? "positive" : "negative"},
                       {"rule", rule.rule_text()},
                       {"predicates", rule.predicates},
                       {"condensed", rule.condensed},
                       {"importance", imp.importance},
                       {"rate_recurrent", imp.rate_recurrent},
                       {"rate_non_recurrent", imp.rate_non_recurrent}});
  }
  legend["clauses"] = std::move(clauses);
  write_text_file(legend_path, legend.dump(2) + "\n");
}

struct PatientExplanation {
  int class_sum = 0;
  Outcome prediction = Outcome::no_recurrence;
  std::vector<ReadableClause> fired;  // in clause order
};

inline PatientExplanation explain_patient(const TsetlinMachine& model, const LiteralVector& x) {
  PatientExplanation e;
  e.class_sum = class_sum(model, x, EvalMode::infer);
  e.prediction = predict(model, x);
  for (std::size_t c = 0; c < model.clauses().size(); ++c)
    if (clause_eval(model.clauses()[c], x, EvalMode::infer))
      e.fired.push_back(readable_clause(model.clauses()[c], c, model.schema()));
  return e;
}

}  // namespace tmrisk
