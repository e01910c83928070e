#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ealgan/active_sampling.hpp"
#include "ealgan/dataset.hpp"
#include "ealgan/losses.hpp"
#include "ealgan/networks.hpp"

namespace ealgan {

enum class Ablation { none, no_embedding, single_disc, plain_loss, random_sampling };

std::string to_string(Ablation a);
// Accepts the enum spelling; throws std::invalid_argument otherwise.
Ablation parse_ablation(const std::string& tag);
inline constexpr Ablation kAllAblations[] = {Ablation::none, Ablation::no_embedding,
                                             Ablation::single_disc, Ablation::plain_loss,
                                             Ablation::random_sampling};

// How many fake samples enter the auxiliary loss relative to the n_r
// labeled reals. `batch` feeds the whole fake batch. A ratio f:r with r > 0
// feeds round(f/r · n_r) fakes beside the reals; f:0 feeds n_r fakes and no
// reals; 0:r feeds reals only.
struct FakeRealRatio {
  enum class Mode { batch, ratio };
  Mode mode = Mode::batch;
  double fake = 1.0;
  double real = 1.0;

  static FakeRealRatio whole_batch() { return {}; }
  static FakeRealRatio of(double fake, double real);
  // "batch" or "f:r" with non-negative numbers, not both zero.
  static FakeRealRatio parse(const std::string& text);
  std::string to_string() const;

  bool aux_uses_real() const;
  std::size_t aux_fake_count(std::size_t n_real, std::size_t fake_batch) const;
};

struct TrainConfig {
  std::size_t m = 10;
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double rho = 0.05;
  double gen_lr = 0.01;
  double disc_lr_lo = 0.01;
  double disc_lr_hi = 0.05;
  FakeRealRatio fake_real;
  std::uint64_t seed = 0;
  Ablation ablation = Ablation::none;
  int generator_depth = kDefaultGeneratorDepth;
  // Discriminator k's context from predecessors' predictions before this
  // iteration's updates instead of after.
  bool frozen_context = false;

  void validate() const;  // throws std::invalid_argument
};

// Effective settings after an ablation is applied.
struct ComponentSet {
  std::size_t m = 10;
  bool projection = true;
  bool plain_loss = false;
  bool random_sampling = false;
};
ComponentSet apply_ablation(const TrainConfig& cfg);

struct IterationRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t iter = 0;   // 1-based within the epoch
  double gen_loss = 0.0;
  double disc_loss = 0.0;  // mean over discriminators
  std::size_t labels_revealed = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_auc = 0.0;
  double train_gmean = 0.0;
  double score = 0.0;  // auc × gmean
};

struct TrainHistory {
  std::vector<IterationRecord> iterations;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based
  std::size_t labels_revealed = 0;
  std::size_t label_requests = 0;
  std::size_t samples_visited = 0;

  std::vector<double> scores() const;
  // One row per iteration; the epoch's train metrics appear on its last row.
  std::string to_csv() const;
};

// What one iteration did, for tests and diagnostics.
struct IterationTrace {
  std::size_t epoch = 0;
  std::size_t iter = 0;
  std::vector<std::size_t> batch_indices;  // rows of the dataset in this batch
  std::vector<std::size_t> selected;       // dataset rows whose labels were revealed
  Labels revealed;
  std::vector<ModulatingContext> generator_contexts;
  std::vector<ModulatingContext> discriminator_contexts;
  std::size_t aux_real_count = 0;
  std::size_t aux_fake_count = 0;
  double gen_loss = 0.0;
  std::vector<double> disc_losses;
};

using IterationObserver = std::function<void(const IterationTrace&, const EnsembleModel&)>;

struct TrainResult {
  EnsembleModel model;  // best checkpoint
  TrainHistory history;
};

// Full training loop. `data` must already be normalized; its labels are hidden
// behind `oracle` during training and used only for epoch evaluation.
TrainResult train(const Dataset& data, const TrainConfig& cfg, LabelOracle& oracle,
                  const IterationObserver& observer = {});
TrainResult train(const Dataset& data, const TrainConfig& cfg);

// Index of the best score; ties keep the earliest.
std::size_t select_checkpoint(std::span<const double> scores);
EnsembleModel select_checkpoint(std::span<const double> scores,
                                const std::vector<EnsembleModel>& snapshots);

}  // namespace ealgan
