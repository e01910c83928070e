#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ealgan/dataset.hpp"

namespace ealgan {

enum class ClusterType { single_cluster, multi_cluster, multi_density };

std::string to_string(ClusterType t);
std::optional<ClusterType> parse_cluster_type(const std::string& s);

struct SynthConfig {
  ClusterType cluster_type = ClusterType::single_cluster;
  std::size_t n = 1000;         // 1000..20000
  std::size_t d = 2;            // 2..160
  double anomaly_ratio = 0.10;  // 0.02..0.20
  std::uint64_t seed = 0;
  // Each side of the normals' bounding box is pushed out by this fraction of
  // the box extent before anomalies are drawn uniformly inside it.
  double anomaly_margin = 1.0;

  std::size_t anomaly_count() const;
  // Throws std::invalid_argument outside the supported ranges.
  void validate() const;
};

// Cluster layout used to draw the normal class.
struct ClusterSpec {
  std::vector<double> mean;
  double stddev = 1.0;
  std::size_t count = 0;
};

std::vector<ClusterSpec> cluster_layout(const SynthConfig& cfg);

// Normals from isotropic Gaussians (one for single_cluster, 3-5 at >= 6σ
// spacing for multi_cluster, three with σ ratio 1:2:4 for multi_density);
// anomalies uniform over the expanded bounding box. Rows are shuffled.
Dataset synthesize(const SynthConfig& cfg);

}  // namespace ealgan
