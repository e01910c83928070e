#include "ealgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ealgan/active_sampling.hpp"
#include "ealgan/format.hpp"

namespace ealgan {

Labels threshold_labels(std::span<const double> scores, double threshold) {
  Labels out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > threshold ? 1 : 0;
  return out;
}

Prediction predict(const EnsembleModel& model, const Matrix& x) {
  Prediction p;
  p.scores = ensemble_score(model, x);
  p.labels = threshold_labels(p.scores);
  return p;
}

namespace {

// Average 1-based ranks in ascending order of `values`.
std::vector<double> average_ranks_ascending(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

void class_counts(std::span<const int> labels, std::size_t& pos, std::size_t& neg) {
  pos = neg = 0;
  for (int y : labels) {
    if (y == 1) ++pos;
    else if (y == 0) ++neg;
    else throw std::invalid_argument("metrics: label not in {0,1}");
  }
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("auc: scores and labels differ in length");
  std::size_t pos, neg;
  class_counts(labels, pos, neg);
  if (pos == 0 || neg == 0) throw UndefinedMetric("auc: both classes must be present");
  const auto ranks = average_ranks_ascending(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (labels[i] == 1) rank_sum += ranks[i];
  }
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

MetricsReport evaluate(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw ShapeError("evaluate: scores and labels differ in length");
  MetricsReport r;
  class_counts(truth, r.n_pos, r.n_neg);
  if (r.n_pos == 0 || r.n_neg == 0) throw UndefinedMetric("evaluate: both classes must be present");
  const Labels predicted = threshold_labels(scores);
  std::size_t tp = 0, tn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1 && predicted[i] == 1) ++tp;
    if (truth[i] == 0 && predicted[i] == 0) ++tn;
  }
  r.tp_rate = static_cast<double>(tp) / static_cast<double>(r.n_pos);
  r.tn_rate = static_cast<double>(tn) / static_cast<double>(r.n_neg);
  r.gmean = std::sqrt(r.tp_rate * r.tn_rate);
  r.auc = auc(scores, truth);
  return r;
}

MetricsReport evaluate(const EnsembleModel& model, const Dataset& data) {
  return evaluate(ensemble_score(model, data.features), data.labels);
}

double gmean(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ShapeError("gmean: length mismatch");
  std::size_t pos, neg;
  class_counts(truth, pos, neg);
  if (pos == 0 || neg == 0) throw UndefinedMetric("gmean: both classes must be present in truth");
  std::size_t tp = 0, tn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1 && predicted[i] == 1) ++tp;
    if (truth[i] == 0 && predicted[i] == 0) ++tn;
  }
  return std::sqrt(static_cast<double>(tp) / static_cast<double>(pos) *
                   (static_cast<double>(tn) / static_cast<double>(neg)));
}

std::string metrics_csv_header() { return "auc,gmean,tp_rate,tn_rate,n_pos,n_neg"; }

std::string metrics_csv_row(const MetricsReport& r) {
  return format_double(r.auc) + "," + format_double(r.gmean) + "," + format_double(r.tp_rate) + "," +
         format_double(r.tn_rate) + "," + std::to_string(r.n_pos) + "," + std::to_string(r.n_neg);
}

std::string to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["auc"] = r.auc;
  j["gmean"] = r.gmean;
  j["tp_rate"] = r.tp_rate;
  j["tn_rate"] = r.tn_rate;
  j["n_pos"] = r.n_pos;
  j["n_neg"] = r.n_neg;
  j["threshold"] = r.threshold;
  return j.dump(2);
}

RankTable friedman_ranks(const Matrix& scores) {
  if (scores.rows() < 1 || scores.cols() < 2) {
    throw std::invalid_argument("friedman_ranks: need at least one dataset and two methods");
  }
  RankTable t;
  t.scores = scores;
  t.ranks = Matrix(scores.rows(), scores.cols());
  t.average_ranks.assign(scores.cols(), 0.0);
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    std::vector<double> negated(scores.cols());
    for (std::size_t j = 0; j < scores.cols(); ++j) negated[j] = -scores(i, j);
    const auto r = average_ranks_ascending(negated);
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      t.ranks(i, j) = r[j];
      t.average_ranks[j] += r[j];
    }
  }
  for (double& r : t.average_ranks) r /= static_cast<double>(scores.rows());
  return t;
}

double nemenyi_cd(std::size_t k, std::size_t n_datasets, double q_alpha) {
  if (k < 2 || n_datasets < 1) throw std::invalid_argument("nemenyi_cd: need k >= 2 and N >= 1");
  const double kd = static_cast<double>(k);
  return q_alpha * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n_datasets)));
}

std::vector<GridPoint> boundary_grid(const EnsembleModel& model, const Box2D& box,
                                     std::size_t resolution) {
  if (model.data_dim() != 2) {
    throw ShapeError("boundary_grid: model has " + std::to_string(model.data_dim()) +
                     " features, the grid needs 2");
  }
  if (resolution == 0) throw std::invalid_argument("boundary_grid: resolution must be >= 1");
  auto coord = [resolution](double lo, double hi, std::size_t i) {
    return resolution == 1 ? lo
                           : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(resolution - 1);
  };
  Matrix points(resolution * resolution, 2);
  for (std::size_t r = 0; r < resolution; ++r) {
    for (std::size_t c = 0; c < resolution; ++c) {
      points(r * resolution + c, 0) = coord(box.x_min, box.x_max, c);
      points(r * resolution + c, 1) = coord(box.y_min, box.y_max, r);
    }
  }
  const auto scores = ensemble_score(model, points);
  std::vector<GridPoint> grid(points.rows());
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = {points(i, 0), points(i, 1), scores[i]};
  return grid;
}

std::string grid_to_csv(const std::vector<GridPoint>& grid) {
  std::string out = "x,y,score\n";
  for (const auto& p : grid) {
    out += format_double(p.x) + "," + format_double(p.y) + "," + format_double(p.score) + "\n";
  }
  return out;
}

}  // namespace ealgan
