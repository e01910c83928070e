#include "ealgan/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ealgan {

double modulating_factor(double pbar) {
  const double q = 1.0 - pbar;
  return q * q;
}

double ModulatingContext::factor(const std::vector<double>& pbars, std::size_t i) {
  return pbars.empty() ? 1.0 : modulating_factor(pbars.at(i));
}

double truth_probability(double phi, int label) { return label == 1 ? phi : 1.0 - phi; }

namespace {

void check_context(const std::vector<double>& pbars, std::size_t n, const char* what) {
  if (!pbars.empty() && pbars.size() != n) {
    throw ShapeError(std::string(what) + ": context has " + std::to_string(pbars.size()) +
                     " entries for " + std::to_string(n) + " samples");
  }
}

void check_labels(std::span<const double> probs, std::span<const int> y, const char* what) {
  if (probs.size() != y.size()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(probs.size()) + " probabilities, " +
                     std::to_string(y.size()) + " labels");
  }
}

// -(1/n) Σ w_i log p_i with p_i = prob or 1 - prob; gradient w.r.t. prob.
double weighted_log_term(std::span<const double> probs, const std::vector<double>& pbars,
                         bool complement, std::vector<double>& grad) {
  const std::size_t n = probs.size();
  grad.assign(n, 0.0);
  if (n == 0) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = ModulatingContext::factor(pbars, i);
    const double p = complement ? 1.0 - probs[i] : probs[i];
    value -= w * std::log(p);
    grad[i] = (complement ? w : -w) * inv_n / p;
  }
  return value * inv_n;
}

double weighted_truth_term(std::span<const double> phi, std::span<const int> y,
                           const std::vector<double>& pbars, std::vector<double>& grad) {
  const std::size_t n = phi.size();
  grad.assign(n, 0.0);
  if (n == 0) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = ModulatingContext::factor(pbars, i);
    const double p = truth_probability(phi[i], y[i]);
    value -= w * std::log(p);
    grad[i] = (y[i] == 1 ? -w : w) * inv_n / p;
  }
  return value * inv_n;
}

}  // namespace

LossGrad disc_adversarial_loss(std::span<const double> c_real, std::span<const double> c_fake,
                               const ModulatingContext& ctx) {
  check_context(ctx.real_adv, c_real.size(), "disc_adversarial_loss (real)");
  check_context(ctx.fake_adv, c_fake.size(), "disc_adversarial_loss (fake)");
  LossGrad out;
  out.value = weighted_log_term(c_real, ctx.real_adv, false, out.grad_real) +
              weighted_log_term(c_fake, ctx.fake_adv, true, out.grad_fake);
  return out;
}

LossGrad disc_auxiliary_loss(std::span<const double> phi_real, std::span<const int> y_real,
                             std::span<const double> phi_fake, std::span<const int> y_fake,
                             const ModulatingContext& ctx) {
  check_labels(phi_real, y_real, "disc_auxiliary_loss (real)");
  check_labels(phi_fake, y_fake, "disc_auxiliary_loss (fake)");
  check_context(ctx.real_aux, phi_real.size(), "disc_auxiliary_loss (real)");
  check_context(ctx.fake_aux, phi_fake.size(), "disc_auxiliary_loss (fake)");
  LossGrad out;
  out.value = weighted_truth_term(phi_real, y_real, ctx.real_aux, out.grad_real) +
              weighted_truth_term(phi_fake, y_fake, ctx.fake_aux, out.grad_fake);
  return out;
}

double disc_total_loss(const LossGrad& adversarial, const LossGrad& auxiliary) {
  return adversarial.value + auxiliary.value;
}

LossGrad gen_adversarial_loss(std::span<const double> c_fake, const ModulatingContext& ctx) {
  check_context(ctx.gen_adv, c_fake.size(), "gen_adversarial_loss");
  LossGrad out;
  out.value = weighted_log_term(c_fake, ctx.gen_adv, false, out.grad_fake);
  return out;
}

LossGrad gen_auxiliary_loss(std::span<const double> phi_fake, std::span<const int> y_fake,
                            const ModulatingContext& ctx) {
  check_labels(phi_fake, y_fake, "gen_auxiliary_loss");
  check_context(ctx.fake_aux, phi_fake.size(), "gen_auxiliary_loss");
  LossGrad out;
  out.value = weighted_truth_term(phi_fake, y_fake, ctx.fake_aux, out.grad_fake);
  return out;
}

LossGrad weighted_bce(std::span<const double> phi, std::span<const int> y, const CostWeights& costs) {
  check_labels(phi, y, "weighted_bce");
  if (!(costs.anomaly > 0.0 && costs.normal > 0.0)) {
    throw std::invalid_argument("weighted_bce: costs must be positive");
  }
  LossGrad out;
  const std::size_t n = phi.size();
  out.grad_real.assign(n, 0.0);
  if (n == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] == 1) {
      out.value -= costs.anomaly * std::log(phi[i]);
      out.grad_real[i] = -costs.anomaly * inv_n / phi[i];
    } else {
      out.value -= costs.normal * std::log(1.0 - phi[i]);
      out.grad_real[i] = costs.normal * inv_n / (1.0 - phi[i]);
    }
  }
  out.value *= inv_n;
  return out;
}

// Ensemble-level objectives -------------------------------------------------

BatchPredictions predict_batch(const DiscriminatorNet& disc, const DiscriminatorBatch& batch) {
  BatchPredictions p;
  if (batch.real_x.rows() > 0) p.real = discriminator_forward(disc, batch.real_x, batch.real_y);
  if (batch.fake_x.rows() > 0) p.fake = discriminator_forward(disc, batch.fake_x, batch.fake_y);
  if (batch.aux_fake_x.rows() > 0) p.aux_fake_phi = discriminator_phi(disc, batch.aux_fake_x);
  return p;
}

ContextAccumulator::ContextAccumulator(const DiscriminatorBatch& batch)
    : batch_(&batch),
      real_adv_(batch.real_x.rows(), 0.0),
      fake_adv_(batch.fake_x.rows(), 0.0),
      real_aux_(batch.aux_uses_real ? batch.real_x.rows() : 0, 0.0),
      fake_aux_(batch.aux_fake_x.rows(), 0.0) {}

void ContextAccumulator::add(const BatchPredictions& p) {
  for (std::size_t i = 0; i < real_adv_.size(); ++i) real_adv_[i] += p.real.adversarial.at(i);
  for (std::size_t i = 0; i < fake_adv_.size(); ++i) fake_adv_[i] += 1.0 - p.fake.adversarial.at(i);
  for (std::size_t i = 0; i < real_aux_.size(); ++i) {
    real_aux_[i] += truth_probability(p.real.auxiliary.at(i), batch_->real_y[i]);
  }
  for (std::size_t i = 0; i < fake_aux_.size(); ++i) {
    fake_aux_[i] += truth_probability(p.aux_fake_phi.at(i), batch_->aux_fake_y[i]);
  }
  ++count_;
}

ModulatingContext ContextAccumulator::context() const {
  ModulatingContext ctx;
  ctx.k = count_ + 1;
  if (count_ == 0) return ctx;
  const double inv = 1.0 / static_cast<double>(count_);
  auto mean = [inv](const std::vector<double>& sums) {
    std::vector<double> out(sums);
    for (double& v : out) v *= inv;
    return out;
  };
  ctx.real_adv = mean(real_adv_);
  ctx.fake_adv = mean(fake_adv_);
  ctx.real_aux = mean(real_aux_);
  ctx.fake_aux = mean(fake_aux_);
  return ctx;
}

DiscriminatorObjective discriminator_objective(const DiscriminatorNet& disc,
                                               const DiscriminatorBatch& batch,
                                               const ModulatingContext& ctx) {
  DiscriminatorObjective obj;
  DiscriminatorTape real_tape, fake_tape, aux_tape;
  const bool has_real = batch.real_x.rows() > 0;
  const bool has_aux_fake = batch.aux_fake_x.rows() > 0;
  if (has_real) obj.predictions.real = discriminator_forward(disc, batch.real_x, batch.real_y, &real_tape);
  obj.predictions.fake = discriminator_forward(disc, batch.fake_x, batch.fake_y, &fake_tape);
  if (has_aux_fake) {
    const auto out = discriminator_forward(disc, batch.aux_fake_x, batch.aux_fake_y, &aux_tape);
    obj.predictions.aux_fake_phi = out.auxiliary;
  }

  const std::span<const double> no_probs;
  const std::span<const int> no_labels;
  obj.adversarial = disc_adversarial_loss(obj.predictions.real.adversarial,
                                          obj.predictions.fake.adversarial, ctx);
  obj.auxiliary = disc_auxiliary_loss(
      batch.aux_uses_real ? std::span<const double>(obj.predictions.real.auxiliary) : no_probs,
      batch.aux_uses_real ? std::span<const int>(batch.real_y) : no_labels,
      obj.predictions.aux_fake_phi, batch.aux_fake_y, ctx);
  obj.total = disc_total_loss(obj.adversarial, obj.auxiliary);

  if (has_real) {
    const std::vector<double> empty;
    accumulate(obj.grads, discriminator_backward(disc, real_tape, obj.adversarial.grad_real,
                                                 batch.aux_uses_real ? obj.auxiliary.grad_real : empty)
                              .params);
  }
  accumulate(obj.grads, discriminator_backward(disc, fake_tape, obj.adversarial.grad_fake, {}).params);
  if (has_aux_fake) {
    accumulate(obj.grads, discriminator_backward(disc, aux_tape, {}, obj.auxiliary.grad_fake).params);
  }
  return obj;
}

std::vector<ModulatingContext> generator_contexts(const EnsembleModel& model, const Matrix& fake_x,
                                                  std::span<const int> fake_y, bool plain) {
  const std::size_t m = model.size();
  const std::size_t n = fake_x.rows();
  std::vector<ModulatingContext> contexts(m);
  std::vector<double> adv_sum(n, 0.0), aux_sum(n, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    contexts[k].k = k + 1;
    if (!plain && k > 0) {
      const double inv = 1.0 / static_cast<double>(k);
      contexts[k].gen_adv.resize(n);
      contexts[k].fake_aux.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        contexts[k].gen_adv[i] = adv_sum[i] * inv;
        contexts[k].fake_aux[i] = aux_sum[i] * inv;
      }
    }
    if (plain || k + 1 == m) continue;
    const auto out = discriminator_forward(model.discriminators[k], fake_x, fake_y);
    for (std::size_t i = 0; i < n; ++i) {
      adv_sum[i] += out.adversarial[i];
      aux_sum[i] += truth_probability(out.auxiliary[i], fake_y[i]);
    }
  }
  return contexts;
}

GeneratorObjective gen_total_loss(const EnsembleModel& model, const Matrix& fake_x,
                                  std::span<const int> fake_y,
                                  const std::vector<ModulatingContext>& contexts) {
  if (contexts.size() != model.size()) {
    throw ShapeError("gen_total_loss: " + std::to_string(contexts.size()) + " contexts for " +
                     std::to_string(model.size()) + " discriminators");
  }
  GeneratorObjective obj;
  obj.grad_fake = Matrix(fake_x.rows(), fake_x.cols());
  for (std::size_t k = 0; k < model.size(); ++k) {
    DiscriminatorTape tape;
    const auto& disc = model.discriminators[k];
    const auto out = discriminator_forward(disc, fake_x, fake_y, &tape);
    const LossGrad adv = gen_adversarial_loss(out.adversarial, contexts[k]);
    const LossGrad aux = gen_auxiliary_loss(out.auxiliary, fake_y, contexts[k]);
    obj.per_discriminator.push_back(adv.value + aux.value);
    obj.value += adv.value + aux.value;
    obj.grad_fake += discriminator_backward(disc, tape, adv.grad_fake, aux.grad_fake, true).input;
  }
  return obj;
}

}  // namespace ealgan
