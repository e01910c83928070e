#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "ealgan/dataset.hpp"
#include "ealgan/networks.hpp"
#include "ealgan/rng.hpp"

namespace ealgan {

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simulated annotator over hidden ground truth. Revealing an index that was
// already revealed is free: labels_revealed() counts distinct indices, while
// requests() counts every index asked for.
class LabelOracle {
 public:
  explicit LabelOracle(Labels truth, std::optional<std::size_t> budget = std::nullopt);

  Labels reveal(std::span<const std::size_t> indices);

  std::size_t labels_revealed() const { return revealed_.size(); }
  std::size_t requests() const { return requests_; }
  std::optional<std::size_t> budget() const { return budget_; }
  std::size_t size() const { return truth_.size(); }

 private:
  Labels truth_;
  std::optional<std::size_t> budget_;
  std::unordered_set<std::size_t> revealed_;
  std::size_t requests_ = 0;
};

struct SamplingConfig {
  double rho = 0.05;
  std::size_t batch_size = 128;

  // max(1, round(batch_size × rho))
  std::size_t selected_count() const;
};
std::size_t selection_count(std::size_t batch_size, double rho);

// Mean φ over the ensemble for every row of x.
std::vector<double> ensemble_score(const EnsembleModel& model, const Matrix& x);

// Distances to 0.5 closer than this count as tied: 0.2 and 0.8 are equally
// uncertain, but as doubles their distances differ in the last bit.
inline constexpr double kSelectTieTolerance = 1e-12;

// Indices of the selection_count(scores.size(), rho) scores closest to 0.5,
// ties broken by lower index. Returned in ascending index order.
std::vector<std::size_t> active_select(std::span<const double> scores, double rho);
// Uniformly random subset of the same size (random-sampling ablation).
std::vector<std::size_t> random_select(std::size_t batch_size, double rho, SeededRng& rng);

struct FakeBatch {
  Matrix noise;    // n × 128, standard normal
  Labels labels;   // alternating 0/1 when balanced
  Matrix samples;  // generator output
};

// z ~ N(0, I); balanced batches alternate labels starting at 0, otherwise
// labels are fair coin flips.
FakeBatch sample_fake_batch(const GeneratorNet& gen, std::size_t n, SeededRng& rng,
                            bool balanced = true, GeneratorTape* tape = nullptr);

}  // namespace ealgan
