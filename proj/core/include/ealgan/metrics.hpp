#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ealgan/dataset.hpp"
#include "ealgan/matrix.hpp"
#include "ealgan/networks.hpp"

namespace ealgan {

class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kDecisionThreshold = 0.5;

struct Prediction {
  std::vector<double> scores;
  Labels labels;  // 1 iff score > 0.5
};

Prediction predict(const EnsembleModel& model, const Matrix& x);
Labels threshold_labels(std::span<const double> scores, double threshold = kDecisionThreshold);

// Mann-Whitney AUC with average ranks for ties.
double auc(std::span<const double> scores, std::span<const int> labels);
// sqrt(TP_rate × TN_rate).
double gmean(std::span<const int> predicted, std::span<const int> truth);

struct MetricsReport {
  double auc = 0.0;
  double gmean = 0.0;
  double tp_rate = 0.0;
  double tn_rate = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double threshold = kDecisionThreshold;

  double selection_score() const { return auc * gmean; }
};

MetricsReport evaluate(std::span<const double> scores, std::span<const int> truth);
MetricsReport evaluate(const EnsembleModel& model, const Dataset& data);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& r);
std::string to_json(const MetricsReport& r);

// Per-row ranks (1 = highest score, ties averaged) and their column means.
struct RankTable {
  Matrix scores;  // N datasets × k methods
  Matrix ranks;
  std::vector<double> average_ranks;
};

RankTable friedman_ranks(const Matrix& scores);
// q_a · sqrt(k(k+1) / (6N))
double nemenyi_cd(std::size_t k, std::size_t n_datasets, double q_alpha);

struct Box2D {
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
};

struct GridPoint {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
};

// resolution × resolution lattice (endpoints included) of ensemble scores,
// x varying fastest. Requires a 2-D model.
std::vector<GridPoint> boundary_grid(const EnsembleModel& model, const Box2D& box,
                                     std::size_t resolution);
std::string grid_to_csv(const std::vector<GridPoint>& grid);

}  // namespace ealgan
