#include "ealgan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ealgan/rng.hpp"

namespace ealgan {

std::string to_string(ClusterType t) {
  switch (t) {
    case ClusterType::single_cluster: return "single";
    case ClusterType::multi_cluster: return "multi_cluster";
    case ClusterType::multi_density: return "multi_density";
  }
  return "?";
}

std::optional<ClusterType> parse_cluster_type(const std::string& s) {
  if (s == "single" || s == "single_cluster") return ClusterType::single_cluster;
  if (s == "multi_cluster" || s == "multi-cluster") return ClusterType::multi_cluster;
  if (s == "multi_density" || s == "multi-density") return ClusterType::multi_density;
  return std::nullopt;
}

std::size_t SynthConfig::anomaly_count() const {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * anomaly_ratio));
}

void SynthConfig::validate() const {
  if (n < 1000 || n > 20000) throw std::invalid_argument("synth: n must be in [1000, 20000]");
  if (d < 2 || d > 160) throw std::invalid_argument("synth: d must be in [2, 160]");
  if (!(anomaly_ratio >= 0.02 && anomaly_ratio <= 0.20)) {
    throw std::invalid_argument("synth: anomaly ratio must be in [0.02, 0.20]");
  }
  if (!(anomaly_margin >= 0.0)) throw std::invalid_argument("synth: anomaly margin must be >= 0");
  if (anomaly_count() < 1) throw std::invalid_argument("synth: no anomalies at this n and ratio");
}

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Rejection-samples means inside a cube until every pair satisfies its
// separation; the cube grows if placement keeps failing.
void place_means(std::vector<ClusterSpec>& clusters, std::size_t d, double separation_scale,
                 bool sum_of_sigmas, SeededRng& rng) {
  auto required = [&](const ClusterSpec& a, const ClusterSpec& b) {
    return sum_of_sigmas ? separation_scale * (a.stddev + b.stddev)
                         : separation_scale * std::max(a.stddev, b.stddev);
  };
  double widest = 0.0;
  for (const auto& a : clusters)
    for (const auto& b : clusters) widest = std::max(widest, required(a, b));
  double half = widest;
  for (;;) {
    bool ok = true;
    for (std::size_t k = 0; k < clusters.size() && ok; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
        std::vector<double> m(d);
        for (double& v : m) v = rng.uniform(-half, half);
        placed = true;
        for (std::size_t j = 0; j < k; ++j) {
          if (distance(m, clusters[j].mean) < required(clusters[k], clusters[j])) {
            placed = false;
            break;
          }
        }
        if (placed) clusters[k].mean = std::move(m);
      }
      ok = placed;
    }
    if (ok) return;
    half *= 1.5;
  }
}

}  // namespace

std::vector<ClusterSpec> cluster_layout(const SynthConfig& cfg) {
  cfg.validate();
  SeededRng rng(cfg.seed ^ 0x5c1u);
  std::vector<ClusterSpec> clusters;
  switch (cfg.cluster_type) {
    case ClusterType::single_cluster:
      clusters.push_back({std::vector<double>(cfg.d, 0.0), 1.0, 0});
      break;
    case ClusterType::multi_cluster: {
      const auto k = 3 + static_cast<std::size_t>(rng.below(3));
      clusters.assign(k, ClusterSpec{{}, 1.0, 0});
      place_means(clusters, cfg.d, 6.0, false, rng);
      break;
    }
    case ClusterType::multi_density:
      clusters = {ClusterSpec{{}, 1.0, 0}, ClusterSpec{{}, 2.0, 0}, ClusterSpec{{}, 4.0, 0}};
      place_means(clusters, cfg.d, 3.0, true, rng);
      break;
  }
  const std::size_t normals = cfg.n - cfg.anomaly_count();
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    clusters[k].count = normals / clusters.size() + (k < normals % clusters.size() ? 1 : 0);
  }
  return clusters;
}

Dataset synthesize(const SynthConfig& cfg) {
  const auto clusters = cluster_layout(cfg);
  SeededRng rng(cfg.seed);
  const std::size_t n_anom = cfg.anomaly_count();
  const std::size_t n_norm = cfg.n - n_anom;

  Matrix x(cfg.n, cfg.d);
  Labels y(cfg.n, 0);
  std::size_t row = 0;
  for (const auto& c : clusters) {
    for (std::size_t i = 0; i < c.count; ++i, ++row) {
      for (std::size_t j = 0; j < cfg.d; ++j) x(row, j) = c.mean[j] + c.stddev * rng.normal();
    }
  }

  std::vector<double> lo(cfg.d), hi(cfg.d);
  for (std::size_t j = 0; j < cfg.d; ++j) {
    lo[j] = hi[j] = x(0, j);
    for (std::size_t i = 1; i < n_norm; ++i) {
      lo[j] = std::min(lo[j], x(i, j));
      hi[j] = std::max(hi[j], x(i, j));
    }
    const double pad = cfg.anomaly_margin * (hi[j] - lo[j]);
    lo[j] -= pad;
    hi[j] += pad;
  }
  for (; row < cfg.n; ++row) {
    for (std::size_t j = 0; j < cfg.d; ++j) x(row, j) = rng.uniform(lo[j], hi[j]);
    y[row] = 1;
  }

  std::vector<std::size_t> order(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));

  Dataset data;
  data.features = gather_rows(x, order);
  data.labels.reserve(cfg.n);
  for (auto i : order) data.labels.push_back(y[i]);
  for (std::size_t j = 0; j < cfg.d; ++j) data.feature_names.push_back("x" + std::to_string(j));
  data.source_tag = "synth:" + to_string(cfg.cluster_type) + ":n=" + std::to_string(cfg.n) +
                    ":d=" + std::to_string(cfg.d) + ":seed=" + std::to_string(cfg.seed);
  return data;
}

}  // namespace ealgan
