// Generates the built-in synthetic cohort, trains a machine with the
// default hyperparameters and prints the strongest rules.

#include <iostream>

#include "tmrisk/tmrisk.hpp"

int main() {
  using namespace tmrisk;
  const FeatureSchema schema = photo_like_schema();
  const Cohort cohort = generate_cohort(schema, photo_like_cohort_config(7));
  std::vector<Outcome> labels;
  for (const auto& r : cohort.records) labels.push_back(*r.label);
  const auto split = stratified_split(labels, 0.2, 7);
  const auto samples = binarize_dataset(cohort.records, schema);
  const auto train = gather<Sample>(samples, split.train);
  const auto test = gather<Sample>(samples, split.test);

  const auto fitted = fit(schema, train, std::span<const Sample>(test), TMParams{});
  const auto report = evaluate_model(fitted.model, test);
  std::cout << "test macro-F1 " << report.macro_f1 << "\n";

  const auto rules = extract_rules(fitted.model, schema, test);
  const auto ranked = clause_importance(activation_matrix(fitted.model, test));
  for (std::size_t r = 0; r < 5 && r < ranked.size(); ++r)
    std::cout << ranked[r].importance << "  " << rules[ranked[r].clause].rule_text() << "\n";
}
