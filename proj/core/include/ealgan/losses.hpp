#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ealgan/matrix.hpp"
#include "ealgan/networks.hpp"

namespace ealgan {

// (1 - p̄)²: samples that preceding ensemble members already get right are
// down-weighted, misclassified ones keep a weight near 1.
double modulating_factor(double pbar);

// Per-sample averages over discriminators 1..k-1. An empty vector means there
// are no predecessors (k = 1, or the plain-loss ablation), which makes every
// factor exactly 1. Factors are constants: no gradient flows through them.
struct ModulatingContext {
  std::size_t k = 1;
  std::vector<double> real_adv;  // mean P(real) predicted for real samples
  std::vector<double> fake_adv;  // mean P(fake) predicted for fake samples
  std::vector<double> real_aux;  // mean probability of the true class, real samples
  std::vector<double> fake_aux;  // mean probability of the true class, fake samples
  std::vector<double> gen_adv;   // mean P(real) predicted for fake samples

  // Weight for sample i drawn from one of the fields above.
  static double factor(const std::vector<double>& pbars, std::size_t i);
};

struct CostWeights {
  double anomaly = 1.0;  // C1
  double normal = 1.0;   // C0
};

// Loss value and its gradient with respect to the probability inputs.
struct LossGrad {
  double value = 0.0;
  std::vector<double> grad_real;
  std::vector<double> grad_fake;
};

// Adversarial term of discriminator k:
//   -(1/n_r) Σ (1-p̄_real)² log C(x_r) - (1/n_f) Σ (1-p̄_fake)² log(1 - C(x_g))
LossGrad disc_adversarial_loss(std::span<const double> c_real, std::span<const double> c_fake,
                               const ModulatingContext& ctx);
// Auxiliary term of discriminator k; φ is P(anomaly), so the probability of
// the true class is φ for y = 1 and 1 - φ for y = 0. An empty side
// contributes nothing.
LossGrad disc_auxiliary_loss(std::span<const double> phi_real, std::span<const int> y_real,
                             std::span<const double> phi_fake, std::span<const int> y_fake,
                             const ModulatingContext& ctx);
double disc_total_loss(const LossGrad& adversarial, const LossGrad& auxiliary);

// Generator terms contributed by discriminator k (gradients in grad_fake).
LossGrad gen_adversarial_loss(std::span<const double> c_fake, const ModulatingContext& ctx);
LossGrad gen_auxiliary_loss(std::span<const double> phi_fake, std::span<const int> y_fake,
                            const ModulatingContext& ctx);

// Cost-weighted BCE over φ (gradient in grad_real).
LossGrad weighted_bce(std::span<const double> phi, std::span<const int> y, const CostWeights& costs);

double truth_probability(double phi, int label);

// Ensemble-level objectives -------------------------------------------------

// Samples one discriminator update sees. The adversarial term uses the real
// samples and the fake batch; the auxiliary term uses the real samples (if
// `aux_uses_real`) and the auxiliary fake set, whose size is governed by the
// fake:real ratio.
struct DiscriminatorBatch {
  Matrix real_x;
  Labels real_y;
  Matrix fake_x;
  Labels fake_y;
  Matrix aux_fake_x;
  Labels aux_fake_y;
  bool aux_uses_real = true;
};

// A discriminator's predictions on every part of a DiscriminatorBatch.
struct BatchPredictions {
  DiscriminatorOutput real;
  DiscriminatorOutput fake;
  std::vector<double> aux_fake_phi;
};

BatchPredictions predict_batch(const DiscriminatorNet& disc, const DiscriminatorBatch& batch);

// Running sums of predecessor predictions for discriminator contexts.
class ContextAccumulator {
 public:
  explicit ContextAccumulator(const DiscriminatorBatch& batch);
  void add(const BatchPredictions& predictions);
  std::size_t count() const { return count_; }
  // Context for discriminator count()+1; empty fields when count() == 0.
  ModulatingContext context() const;

 private:
  const DiscriminatorBatch* batch_;
  std::size_t count_ = 0;
  std::vector<double> real_adv_, fake_adv_, real_aux_, fake_aux_;
};

struct DiscriminatorObjective {
  LossGrad adversarial;
  LossGrad auxiliary;
  double total = 0.0;
  std::vector<Matrix> grads;       // DiscriminatorNet::parameters() order
  BatchPredictions predictions;    // pre-update predictions
};

// Adversarial plus auxiliary loss for one discriminator with parameter gradients.
DiscriminatorObjective discriminator_objective(const DiscriminatorNet& disc,
                                               const DiscriminatorBatch& batch,
                                               const ModulatingContext& ctx);

// Contexts for the generator terms of every discriminator, from predictions
// of discriminators 1..k-1 on the fake batch. `plain` returns all-empty
// contexts (every factor 1).
std::vector<ModulatingContext> generator_contexts(const EnsembleModel& model, const Matrix& fake_x,
                                                  std::span<const int> fake_y, bool plain = false);

struct GeneratorObjective {
  double value = 0.0;
  std::vector<double> per_discriminator;  // L_GAN^{G_k} + L_AC^{G_k}
  Matrix grad_fake;                       // dL/dx for every fake sample
};

// Σ_k (L_GAN^{G_k} + L_AC^{G_k}) with the supplied (frozen) contexts.
GeneratorObjective gen_total_loss(const EnsembleModel& model, const Matrix& fake_x,
                                  std::span<const int> fake_y,
                                  const std::vector<ModulatingContext>& contexts);

}  // namespace ealgan
