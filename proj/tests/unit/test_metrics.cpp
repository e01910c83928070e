#include <cmath>

#include <gtest/gtest.h>

#include "ealgan/active_sampling.hpp"
#include "ealgan/metrics.hpp"
#include "reference.hpp"

using namespace ealgan;

TEST(Auc, Examples) {
  EXPECT_EQ(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.8, 0.1}, std::vector<int>{1, 1, 0}), 1.0);
  EXPECT_EQ(auc(std::vector<double>{0.1, 0.8, 0.9}, std::vector<int>{1, 0, 0}), 0.0);
  EXPECT_EQ(auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{1, 0, 1, 0}), 0.5);
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), UndefinedMetric);
  EXPECT_THROW(auc(std::vector<double>{0.1}, std::vector<int>{1, 0}), ShapeError);
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 2}), std::invalid_argument);
}

TEST(Auc, MatchesPairwiseCount) {
  SeededRng rng(5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(120);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = t % 2 ? static_cast<double>(rng.below(5)) : rng.uniform();
      y[i] = static_cast<int>(rng.below(2));
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(auc(s, y), ref::brute_auc(s, y), 1e-12);
  }
}

TEST(Auc, InvariantUnderMonotoneTransformAndFlipsUnderNegation) {
  SeededRng rng(6);
  std::vector<double> s(50), squashed(50), neg(50);
  std::vector<int> y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    s[i] = rng.uniform(-2, 2);
    squashed[i] = std::exp(3.0 * s[i]);
    neg[i] = -s[i];
    y[i] = i % 3 == 0 ? 1 : 0;
  }
  EXPECT_NEAR(auc(s, y), auc(squashed, y), 1e-12);
  EXPECT_NEAR(auc(s, y) + auc(neg, y), 1.0, 1e-12);
}

TEST(Gmean, Examples) {
  const std::vector<int> truth{1, 1, 0, 0, 0};
  EXPECT_NEAR(gmean(std::vector<int>{1, 0, 0, 0, 1}, truth), std::sqrt(0.5 * 2.0 / 3.0), 1e-15);
  EXPECT_EQ(gmean(truth, truth), 1.0);
  EXPECT_EQ(gmean(std::vector<int>{0, 0, 0, 0, 0}, truth), 0.0);
  EXPECT_THROW(gmean(std::vector<int>{0, 0}, std::vector<int>{0, 0}), UndefinedMetric);
}

TEST(Evaluate, ThresholdAndReport) {
  EXPECT_EQ(threshold_labels(std::vector<double>{0.2, 0.5, 0.51}), (Labels{0, 0, 1}));
  const std::vector<double> s{0.9, 0.4, 0.6, 0.1};
  const std::vector<int> y{1, 1, 0, 0};
  const MetricsReport r = evaluate(s, y);
  EXPECT_EQ(r.auc, 0.75);
  EXPECT_EQ(r.tp_rate, 0.5);
  EXPECT_EQ(r.tn_rate, 0.5);
  EXPECT_EQ(r.gmean, 0.5);
  EXPECT_EQ(r.n_pos, 2u);
  EXPECT_EQ(r.n_neg, 2u);
  EXPECT_EQ(r.selection_score(), 0.375);
  EXPECT_EQ(metrics_csv_header(), "auc,gmean,tp_rate,tn_rate,n_pos,n_neg");
  EXPECT_EQ(metrics_csv_row(r), "0.75,0.5,0.5,0.5,2,2");
  EXPECT_NE(to_json(r).find("\"auc\""), std::string::npos);
}

TEST(Evaluate, ModelScoresAreEnsembleMean) {
  SeededRng rng(7);
  const EnsembleModel m = build_ensemble(2, 3, rng, 0.01, 0.05);
  Dataset d;
  d.features = Matrix{{0.1, 0.2}, {0.9, 0.8}, {0.5, 0.5}, {0.3, 0.7}};
  d.labels = {0, 1, 0, 1};
  const Prediction p = predict(m, d.features);
  EXPECT_EQ(p.labels, threshold_labels(p.scores));
  EXPECT_EQ(evaluate(m, d).auc, evaluate(p.scores, d.labels).auc);
}

TEST(FriedmanRanks, MatchesSortOracle) {
  const Matrix scores{{0.9, 0.8, 0.7}, {0.5, 0.5, 0.9}, {0.1, 0.3, 0.2}};
  const RankTable t = friedman_ranks(scores);
  EXPECT_EQ(t.ranks, (Matrix{{1, 2, 3}, {2.5, 2.5, 1}, {3, 1, 2}}));
  EXPECT_NEAR(t.average_ranks[0], 6.5 / 3.0, 1e-15);
  SeededRng rng(8);
  Matrix big(12, 6);
  std::vector<std::vector<double>> rows(12, std::vector<double>(6));
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 6; ++j) big(i, j) = rows[i][j] = 0.25 * static_cast<double>(rng.below(4));
  const auto want = ref::sorted_ranks(rows);
  const RankTable got = friedman_ranks(big);
  double mean_sum = 0.0;
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(got.ranks(i, j), want[i][j]);
  for (double r : got.average_ranks) mean_sum += r;
  EXPECT_NEAR(mean_sum, 6.0 * 7.0 / 2.0, 1e-12);
  EXPECT_THROW(friedman_ranks(Matrix(3, 1)), std::invalid_argument);
}

TEST(Nemenyi, CriticalDifference) {
  EXPECT_NEAR(nemenyi_cd(5, 10, 2.728), 2.728 * std::sqrt(30.0 / 60.0), 1e-12);
  EXPECT_NEAR(nemenyi_cd(2, 6, 1.960), 1.960 * std::sqrt(6.0 / 36.0), 1e-12);
  EXPECT_THROW(nemenyi_cd(1, 10, 2.0), std::invalid_argument);
}

TEST(BoundaryGrid, LatticeOrderAndScores) {
  SeededRng rng(9);
  const EnsembleModel m = build_ensemble(2, 2, rng, 0.01, 0.05);
  const auto grid = boundary_grid(m, {}, 3);
  ASSERT_EQ(grid.size(), 9u);
  EXPECT_EQ(grid[0].x, 0.0);
  EXPECT_EQ(grid[1].x, 0.5);
  EXPECT_EQ(grid[2].x, 1.0);
  EXPECT_EQ(grid[3].y, 0.5);
  EXPECT_EQ(grid[8].y, 1.0);
  const auto s = ensemble_score(m, Matrix{{0.5, 1.0}});
  EXPECT_EQ(grid[7].score, s[0]);
  const std::string csv = grid_to_csv(grid);
  EXPECT_EQ(csv.substr(0, 12), "x,y,score\n0,");
  const EnsembleModel three = build_ensemble(3, 1, rng, 0.01, 0.05);
  EXPECT_THROW(boundary_grid(three, {}, 3), ShapeError);
}
