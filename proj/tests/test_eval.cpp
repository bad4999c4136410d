#include <set>

#include "test_util.hpp"

using namespace tmrisk;

namespace {

std::vector<Outcome> outcomes(std::initializer_list<int> v) {
  std::vector<Outcome> out;
  for (int b : v) out.push_back(outcome_from_bool(b));
  return out;
}

std::vector<Outcome> cohort_labels(std::size_t n, std::size_t positives) {
  std::vector<Outcome> out(n, Outcome::no_recurrence);
  for (std::size_t i = 0; i < positives; ++i) out[(i * 7919) % n] = Outcome::recurrence;
  return out;
}

}  // namespace

TEST(Metrics, Examples) {
  const auto y = outcomes({1, 1, 0, 0});
  const auto perfect = compute_metrics(y, y);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.macro_precision, 1.0);
  EXPECT_EQ(perfect.macro_recall, 1.0);
  EXPECT_EQ(perfect.macro_f1, 1.0);

  const auto half = compute_metrics(outcomes({1, 0, 1, 0}), y);
  EXPECT_DOUBLE_EQ(half.macro_f1, 0.5);

  const auto degenerate = compute_metrics(outcomes({1, 1, 1}), outcomes({0, 0, 0}));
  EXPECT_EQ(degenerate.accuracy, 0.0);
  EXPECT_EQ(degenerate.per_class[1].precision, 0.0);
  EXPECT_EQ(degenerate.per_class[1].recall, 0.0);
  EXPECT_EQ(degenerate.per_class[0].precision, 0.0);
  EXPECT_EQ(degenerate.macro_f1, 0.0);
  EXPECT_THROW(compute_metrics(outcomes({1}), outcomes({1, 0})), InvalidArgument);
  EXPECT_THROW(compute_metrics({}, {}), InvalidArgument);
}

TEST(Metrics, AverageReports) {
  const auto a = compute_metrics(outcomes({1, 0}), outcomes({1, 0}));
  const auto b = compute_metrics(outcomes({0, 1}), outcomes({1, 0}));
  const std::vector<MetricsReport> both{a, b};
  const auto avg = average_reports(both);
  EXPECT_DOUBLE_EQ(avg.macro_f1, 0.5);
  EXPECT_EQ(avg.confusion.total(), 4u);
}

TEST(Split, PaperScaleExample) {
  const auto labels = cohort_labels(330, 132);
  const auto s = stratified_split(labels, 0.2, 1);
  EXPECT_EQ(s.test.size(), 66u);
  std::size_t pos = 0;
  for (auto i : s.test) pos += labels[i] == Outcome::recurrence;
  EXPECT_TRUE(pos == 26 || pos == 27) << pos;
}

TEST(Split, SmallBalancedHalf) {
  const auto labels = outcomes({1, 0, 1, 0});
  const auto s = stratified_split(labels, 0.5, 3);
  ASSERT_EQ(s.test.size(), 2u);
  ASSERT_EQ(s.train.size(), 2u);
  EXPECT_NE(labels[s.test[0]], labels[s.test[1]]);
  EXPECT_NE(labels[s.train[0]], labels[s.train[1]]);
}

TEST(Split, PartitionStratificationDeterminism) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + gen() % 400;
    std::vector<Outcome> labels(n);
    for (auto& l : labels) l = outcome_from_bool(gen() % 100 < 40);
    labels[0] = labels[1] = Outcome::recurrence;
    labels[2] = labels[3] = Outcome::no_recurrence;
    const double frac = 0.1 + (gen() % 70) / 100.0;
    const auto seed = gen();
    const auto s = stratified_split(labels, frac, seed);
    std::vector<int> seen(n, 0);
    for (auto i : s.train) seen[i]++;
    for (auto i : s.test) seen[i]++;
    for (int c : seen) ASSERT_EQ(c, 1);
    EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
    std::size_t pos = 0, tpos = 0;
    for (auto l : labels) pos += l == Outcome::recurrence;
    for (auto i : s.test) tpos += labels[i] == Outcome::recurrence;
    if (!s.test.empty())
      EXPECT_LE(std::abs(double(tpos) / s.test.size() - double(pos) / n), 1.0 / s.test.size() + 1e-12);
    const auto again = stratified_split(labels, frac, seed);
    EXPECT_EQ(again.train, s.train);
    EXPECT_EQ(again.test, s.test);
  }
}

TEST(Split, Errors) {
  EXPECT_THROW(stratified_split(outcomes({1, 0, 0, 0}), 0.5, 1), InvalidArgument);
  EXPECT_THROW(stratified_split(outcomes({1, 1, 0, 0}), 0.0, 1), InvalidArgument);
  EXPECT_THROW(stratified_split(outcomes({1, 1, 0, 0}), 1.0, 1), InvalidArgument);
}

TEST(KFold, PartitionsEveryIndexOnce) {
  const auto labels = cohort_labels(103, 41);
  const auto folds = stratified_kfold(labels, 5, 11);
  ASSERT_EQ(folds.size(), 5u);
  std::vector<int> tested(labels.size(), 0);
  for (const auto& f : folds) {
    EXPECT_EQ(f.train.size() + f.test.size(), labels.size());
    for (auto i : f.test) tested[i]++;
    std::set<std::size_t> tr(f.train.begin(), f.train.end());
    for (auto i : f.test) EXPECT_FALSE(tr.count(i));
  }
  for (int c : tested) EXPECT_EQ(c, 1);
  EXPECT_THROW(stratified_kfold(labels, 1, 1), InvalidArgument);
}

TEST(Objective, LowerComplexityWinsAtEqualF1) {
  EXPECT_GT(objective_value(0.8, 10, 20, 30), objective_value(0.8, 11, 20, 30));
  EXPECT_DOUBLE_EQ(objective_value(0.8, 0, 20, 30), 0.8);
  EXPECT_DOUBLE_EQ(objective_value(0.8, 600, 20, 30), 0.75);
  EXPECT_DOUBLE_EQ(objective_value(0.8, 600, 20, 30, 0.1), 0.7);
}

class SearchTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto cfg = photo_like_cohort_config(4);
    cfg.rules = {photo_like_rules()[0], photo_like_rules()[2]};
    cohort_ = generate_cohort(schema_, cfg);
    std::vector<Outcome> labels;
    for (const auto& r : cohort_.records) labels.push_back(*r.label);
    const auto s = stratified_split(labels, 0.2, 4);
    train_ = gather<PatientRecord>(cohort_.records, s.train);
    val_ = gather<PatientRecord>(cohort_.records, s.test);
  }
  FeatureSchema schema_ = photo_like_schema();
  Cohort cohort_;
  std::vector<PatientRecord> train_, val_;
};

TEST_F(SearchTest, SingleTrialIsBest) {
  SearchSpace space;
  space.epochs = {5};
  const auto r = random_search(space, 1, schema_, train_, val_, 3);
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_EQ(r.best, 0u);
  EXPECT_EQ(r.winner().params.tm.seed, derive_seed(3, 0));
}

TEST_F(SearchTest, DeterministicLogAndFirstMaximumWins) {
  SearchSpace space;
  space.num_clauses = {10, 20};
  space.epochs = {5, 10};
  const auto a = random_search(space, 8, schema_, train_, val_, 21);
  const auto b = random_search(space, 8, schema_, train_, val_, 21);
  EXPECT_EQ(a.log_json().dump(), b.log_json().dump());
  EXPECT_EQ(a.best, b.best);
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    EXPECT_LE(a.trials[i].objective, a.winner().objective);
    if (i < a.best) EXPECT_LT(a.trials[i].objective, a.winner().objective);
  }
}

TEST_F(SearchTest, FailedTrialsAreLogged) {
  SearchSpace space;
  space.threshold = {0};  // invalid: every trial fails
  space.epochs = {1};
  const auto r = random_search(space, 3, schema_, train_, val_, 1);
  ASSERT_EQ(r.trials.size(), 3u);
  for (const auto& t : r.trials) {
    EXPECT_TRUE(t.failed());
    EXPECT_TRUE(t.to_json()["objective"].is_null());
    EXPECT_EQ(t.to_json()["status"], "failed");
  }
  EXPECT_THROW(random_search(space, 0, schema_, train_, val_, 1), InvalidArgument);
  EXPECT_THROW(SearchSpace::from_json({{"epochs", nlohmann::json::array()}}), InvalidArgument);
}

TEST_F(SearchTest, RecoveringConfigWins) {
  // Untrained candidates (0 epochs) predict the tie label for everyone; the
  // trained ones recover the planted structure. Ties are allowed.
  SearchSpace space;
  space.n_bins = {4};
  space.num_clauses = {40};
  space.threshold = {10, 20};
  space.specificity = {3.0};
  space.epochs = {0, 60};
  const auto r = random_search(space, 50, schema_, train_, val_, 8);
  const auto& w = r.winner();
  double best_good = -1.0;
  for (const auto& t : r.trials)
    if (t.params.tm.epochs == 60) best_good = std::max(best_good, t.objective);
  ASSERT_GT(best_good, 0.0);
  EXPECT_DOUBLE_EQ(w.objective, best_good);
  EXPECT_GE(w.validation->macro_f1, 0.85);
}

TEST(EvaluateModel, EortcAlwaysPositiveRecall) {
  struct Row {
    eortc::Result r;
    Outcome label;
  };
  std::vector<Row> rows;
  for (int s = 0; s <= 17; ++s) rows.push_back({{s, eortc::group_for_score(s)}, outcome_from_bool(s % 2)});
  const auto m = evaluate_model<Row>([](const Row& row) { return eortc::predict(row.r, eortc::RiskGroup::score_0); },
                                     std::span<const Row>(rows));
  EXPECT_EQ(m.per_class[1].recall, 1.0);
}
