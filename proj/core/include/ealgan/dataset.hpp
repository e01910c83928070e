#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ealgan/matrix.hpp"

namespace ealgan {

using Labels = std::vector<int>;

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Feature matrix plus binary labels (1 = anomaly, 0 = normal).
struct Dataset {
  Matrix features;
  Labels labels;
  std::vector<std::string> feature_names;
  std::string source_tag;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }
  std::size_t anomaly_count() const;

  // Rows picked by index, labels and names carried along.
  Dataset subset(const std::vector<std::size_t>& indices) const;
  // Throws DataError unless shapes agree, labels are 0/1 and n >= 2.
  void validate() const;
};

// Per-feature min-max state fitted on the training set.
struct NormalizerState {
  std::vector<double> min;
  std::vector<double> max;

  static NormalizerState fit(const Matrix& x);
  // (x - min) / (max - min); constant features map to 0. No clamping, so
  // unseen data may fall outside [0, 1].
  Matrix apply(const Matrix& x) const;
};

// `label_column` is a header name or a zero-based index; empty means the last
// column. A header row is detected when the first row has a non-numeric cell.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column = "");
Dataset parse_csv(const std::string& text, const std::string& label_column = "",
                  const std::string& source_tag = "<memory>");
std::string to_csv(const Dataset& data);
void write_csv(const Dataset& data, const std::filesystem::path& path);

struct NormalizedSets {
  Dataset train;
  std::vector<Dataset> others;
  NormalizerState state;
};
NormalizedSets normalize_fit_apply(const Dataset& train, const std::vector<Dataset>& others = {});

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};
// Train size is round(n * train_fraction). Stratified mode keeps each class's
// share within one sample of the global ratio and fails if a class would get
// no training samples.
Split split(const Dataset& data, double train_fraction, std::uint64_t seed, bool stratified = true);

}  // namespace ealgan
