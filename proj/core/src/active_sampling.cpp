#include "ealgan/active_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ealgan {

LabelOracle::LabelOracle(Labels truth, std::optional<std::size_t> budget)
    : truth_(std::move(truth)), budget_(budget) {}

Labels LabelOracle::reveal(std::span<const std::size_t> indices) {
  for (auto i : indices) {
    if (i >= truth_.size()) {
      throw std::out_of_range("LabelOracle::reveal: index " + std::to_string(i) + " of " +
                              std::to_string(truth_.size()));
    }
  }
  // Duplicates inside one request count once as well.
  const std::unordered_set<std::size_t> unique(indices.begin(), indices.end());
  std::size_t fresh = 0;
  for (auto i : unique) fresh += revealed_.contains(i) ? 0 : 1;
  if (budget_ && revealed_.size() + fresh > *budget_) {
    throw BudgetExhausted("label budget of " + std::to_string(*budget_) + " exhausted (" +
                          std::to_string(revealed_.size()) + " revealed, " + std::to_string(fresh) +
                          " more requested)");
  }
  Labels out;
  out.reserve(indices.size());
  for (auto i : indices) {
    revealed_.insert(i);
    out.push_back(truth_[i]);
  }
  requests_ += indices.size();
  return out;
}

std::size_t selection_count(std::size_t batch_size, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("sampling ratio must be in (0, 1]");
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(batch_size) * rho));
  return std::min(batch_size, std::max<std::size_t>(1, k));
}

std::size_t SamplingConfig::selected_count() const { return selection_count(batch_size, rho); }

std::vector<double> ensemble_score(const EnsembleModel& model, const Matrix& x) {
  if (model.size() == 0) throw std::invalid_argument("ensemble_score: empty ensemble");
  std::vector<double> score(x.rows(), 0.0);
  for (const auto& disc : model.discriminators) {
    const auto phi = discriminator_phi(disc, x);
    for (std::size_t i = 0; i < score.size(); ++i) score[i] += phi[i];
  }
  const double inv = 1.0 / static_cast<double>(model.size());
  for (double& s : score) s *= inv;
  return score;
}

std::vector<std::size_t> active_select(std::span<const double> scores, double rho) {
  if (scores.empty()) return {};
  const std::size_t k = selection_count(scores.size(), rho);
  std::vector<double> dist(scores.size());
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = std::abs(scores[i] - 0.5);
  std::vector<double> sorted = dist;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  const double cut = sorted[k - 1];
  // Everything clearly inside the cut, then tied entries by index until k.
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] < cut - kSelectTieTolerance) out.push_back(i);
  }
  for (std::size_t i = 0; i < dist.size() && out.size() < k; ++i) {
    if (std::abs(dist[i] - cut) <= kSelectTieTolerance) out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> random_select(std::size_t batch_size, double rho, SeededRng& rng) {
  if (batch_size == 0) return {};
  const std::size_t k = selection_count(batch_size, rho);
  std::vector<std::size_t> all(batch_size);
  std::iota(all.begin(), all.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(all));
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

FakeBatch sample_fake_batch(const GeneratorNet& gen, std::size_t n, SeededRng& rng, bool balanced,
                            GeneratorTape* tape) {
  if (n == 0) throw std::invalid_argument("sample_fake_batch: n must be >= 1");
  FakeBatch batch;
  batch.noise = Matrix(n, kNoiseDim);
  for (double& z : batch.noise.values()) z = rng.normal();
  batch.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    batch.labels[i] = balanced ? static_cast<int>(i % 2) : static_cast<int>(rng.below(2));
  }
  batch.samples = generator_forward(gen, batch.noise, batch.labels, tape);
  return batch;
}

}  // namespace ealgan
