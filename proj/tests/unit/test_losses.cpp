#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ealgan/active_sampling.hpp"
#include "ealgan/losses.hpp"

using namespace ealgan;

namespace {

ModulatingContext context_with(std::vector<double> real_adv, std::vector<double> fake_adv) {
  ModulatingContext c;
  c.k = 2;
  c.real_adv = std::move(real_adv);
  c.fake_adv = std::move(fake_adv);
  return c;
}

const std::vector<double> kNone;
const std::vector<int> kNoLabels;

}  // namespace

TEST(ModulatingFactor, Definition) {
  EXPECT_EQ(modulating_factor(0.0), 1.0);
  EXPECT_EQ(modulating_factor(1.0), 0.0);
  EXPECT_NEAR(modulating_factor(0.9), 0.01, 1e-15);
  EXPECT_EQ(ModulatingContext::factor({}, 3), 1.0);
  EXPECT_NEAR(ModulatingContext::factor({0.2, 0.6}, 1), 0.16, 1e-15);
}

TEST(DiscAdversarial, HandValues) {
  const ModulatingContext first;
  const std::vector<double> half{0.5};
  EXPECT_NEAR(disc_adversarial_loss(half, half, first).value, 1.3863, 1e-4);
  EXPECT_NEAR(disc_adversarial_loss(half, half, context_with({0.9}, {0.9})).value, 0.013863, 1e-6);
}

TEST(DiscAdversarial, DampingIsMonotoneInAgreement) {
  const std::vector<double> c_real{0.3, 0.6}, c_fake{0.4, 0.8};
  double previous = disc_adversarial_loss(c_real, c_fake, ModulatingContext{}).value;
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    const double v = disc_adversarial_loss(c_real, c_fake, context_with({p, p}, {p, p})).value;
    EXPECT_LT(v, previous) << p;
    previous = v;
  }
  EXPECT_EQ(disc_adversarial_loss(c_real, c_fake, context_with({1, 1}, {1, 1})).value, 0.0);
}

TEST(DiscAdversarial, GradientsOfPlainForm) {
  const std::vector<double> c_real{0.25}, c_fake{0.75, 0.5};
  const LossGrad g = disc_adversarial_loss(c_real, c_fake, ModulatingContext{});
  EXPECT_NEAR(g.grad_real[0], -1.0 / 0.25, 1e-12);
  EXPECT_NEAR(g.grad_fake[0], 0.5 / 0.25, 1e-12);
  EXPECT_NEAR(g.grad_fake[1], 0.5 / 0.5, 1e-12);
}

TEST(DiscAuxiliary, HandValuesAndEmptySides) {
  const std::vector<double> phi{0.2};
  const std::vector<int> normal{0}, anomaly{1};
  const ModulatingContext first;
  EXPECT_NEAR(disc_auxiliary_loss(phi, normal, kNone, kNoLabels, first).value, 0.2231, 1e-4);
  EXPECT_NEAR(disc_auxiliary_loss(kNone, kNoLabels, phi, anomaly, first).value, -std::log(0.2), 1e-12);
  EXPECT_NEAR(disc_auxiliary_loss(phi, normal, phi, anomaly, first).value, -std::log(0.8) - std::log(0.2),
              1e-12);
  EXPECT_EQ(disc_auxiliary_loss(kNone, kNoLabels, kNone, kNoLabels, first).value, 0.0);
}

TEST(DiscAuxiliary, UsesTruthClassContext) {
  ModulatingContext c;
  c.k = 2;
  c.real_aux = {0.5};
  const std::vector<double> phi{0.9};
  const std::vector<int> y{1};
  EXPECT_NEAR(disc_auxiliary_loss(phi, y, kNone, kNoLabels, c).value, 0.25 * -std::log(0.9), 1e-12);
  EXPECT_NEAR(truth_probability(0.9, 0), 0.1, 1e-15);
  EXPECT_EQ(truth_probability(0.9, 1), 0.9);
}

TEST(GenLosses, HandValues) {
  const std::vector<double> half{0.5};
  ModulatingContext c;
  c.k = 2;
  c.gen_adv = {0.8};
  EXPECT_NEAR(gen_adversarial_loss(half, c).value, 0.02772, 1e-5);
  EXPECT_NEAR(gen_adversarial_loss(half, ModulatingContext{}).value, std::log(2.0), 1e-12);
  const std::vector<double> phi{0.1};
  EXPECT_NEAR(gen_auxiliary_loss(phi, std::vector<int>{1}, ModulatingContext{}).value, 2.3026, 1e-4);
}

TEST(WeightedBce, HandValuesAndCosts) {
  EXPECT_NEAR(weighted_bce(std::vector<double>{0.1}, std::vector<int>{1}, {}).value, 2.3026, 1e-4);
  EXPECT_NEAR(weighted_bce(std::vector<double>{0.5}, std::vector<int>{0}, {1.0, 0.5}).value, 0.3466, 1e-4);
  const LossGrad g = weighted_bce(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}, {3.0, 1.0});
  EXPECT_NEAR(g.value, (3.0 + 1.0) * std::log(2.0) / 2.0, 1e-12);
  EXPECT_NEAR(g.grad_real[0], -3.0 / 2.0 / 0.5, 1e-12);
  EXPECT_NEAR(g.grad_real[1], 1.0 / 2.0 / 0.5, 1e-12);
  EXPECT_THROW(weighted_bce(std::vector<double>{0.5}, std::vector<int>{1}, {0.0, 1.0}), std::invalid_argument);
}

TEST(Losses, ShapeMismatchesThrow) {
  const std::vector<double> two{0.5, 0.5};
  EXPECT_THROW(disc_adversarial_loss(two, two, context_with({0.5}, {})), ShapeError);
  EXPECT_THROW(disc_auxiliary_loss(two, std::vector<int>{1}, kNone, kNoLabels, {}), ShapeError);
  ModulatingContext c;
  c.gen_adv = {0.5, 0.5, 0.5};
  EXPECT_THROW(gen_adversarial_loss(two, c), ShapeError);
}

TEST(ContextAccumulator, AveragesPredecessorPredictions) {
  DiscriminatorBatch b;
  b.real_x = Matrix(2, 1);
  b.real_y = {1, 0};
  b.fake_x = Matrix(1, 1);
  b.fake_y = {0};
  b.aux_fake_x = Matrix(1, 1);
  b.aux_fake_y = {1};
  ContextAccumulator acc(b);
  EXPECT_TRUE(acc.context().real_adv.empty());
  EXPECT_EQ(acc.context().k, 1u);
  BatchPredictions p1{{{0.8, 0.4}, {0.7, 0.1}}, {{0.3}, {0.5}}, {0.6}};
  BatchPredictions p2{{{0.6, 0.2}, {0.9, 0.3}}, {{0.1}, {0.5}}, {0.2}};
  acc.add(p1);
  acc.add(p2);
  const ModulatingContext c = acc.context();
  EXPECT_EQ(c.k, 3u);
  EXPECT_NEAR(c.real_adv[0], 0.7, 1e-15);
  EXPECT_NEAR(c.real_adv[1], 0.3, 1e-15);
  EXPECT_NEAR(c.fake_adv[0], 0.8, 1e-15);   // mean of 1 - C
  EXPECT_NEAR(c.real_aux[0], 0.8, 1e-15);   // y = 1: φ
  EXPECT_NEAR(c.real_aux[1], 0.8, 1e-15);   // y = 0: 1 - φ
  EXPECT_NEAR(c.fake_aux[0], 0.4, 1e-15);
}

TEST(Ensemble, IdenticalDiscriminatorsFollowClosedForm) {
  SeededRng rng(3);
  EnsembleModel model = build_ensemble(2, 3, rng, 0.01, 0.05);
  std::vector<Matrix> values;
  for (const Matrix* p : model.discriminators[0].parameters()) values.push_back(*p);
  for (auto& d : model.discriminators) d.assign_parameters(values);

  const FakeBatch fb = sample_fake_batch(model.generator, 1, rng);
  const auto out = discriminator_forward(model.discriminators[0], fb.samples, fb.labels);
  const double c = out.adversarial[0];
  const double t = truth_probability(out.auxiliary[0], fb.labels[0]);
  const auto ctxs = generator_contexts(model, fb.samples, fb.labels);
  const GeneratorObjective g = gen_total_loss(model, fb.samples, fb.labels, ctxs);
  const double expect = -std::log(c) * (1.0 + 2.0 * std::pow(1.0 - c, 2)) -
                        std::log(t) * (1.0 + 2.0 * std::pow(1.0 - t, 2));
  EXPECT_NEAR(g.value, expect, 1e-12);

  const auto plain = generator_contexts(model, fb.samples, fb.labels, true);
  EXPECT_NEAR(gen_total_loss(model, fb.samples, fb.labels, plain).value, -3.0 * (std::log(c) + std::log(t)),
              1e-12);
}

TEST(Ensemble, GeneratorContextsUsePredecessorsOnly) {
  SeededRng rng(4);
  const EnsembleModel model = build_ensemble(3, 3, rng, 0.01, 0.05);
  const FakeBatch fb = sample_fake_batch(model.generator, 4, rng);
  const auto ctxs = generator_contexts(model, fb.samples, fb.labels);
  ASSERT_EQ(ctxs.size(), 3u);
  EXPECT_TRUE(ctxs[0].gen_adv.empty());
  const auto o1 = discriminator_forward(model.discriminators[0], fb.samples, fb.labels);
  const auto o2 = discriminator_forward(model.discriminators[1], fb.samples, fb.labels);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(ctxs[1].gen_adv[i], o1.adversarial[i]);
    EXPECT_NEAR(ctxs[2].gen_adv[i], (o1.adversarial[i] + o2.adversarial[i]) / 2.0, 1e-15);
    EXPECT_NEAR(ctxs[2].fake_aux[i],
                (truth_probability(o1.auxiliary[i], fb.labels[i]) + truth_probability(o2.auxiliary[i], fb.labels[i])) /
                    2.0,
                1e-15);
  }
  const GeneratorObjective g = gen_total_loss(model, fb.samples, fb.labels, ctxs);
  double sum = 0.0;
  for (double v : g.per_discriminator) sum += v;
  EXPECT_NEAR(g.value, sum, 1e-12);
  EXPECT_THROW(gen_total_loss(model, fb.samples, fb.labels, {ctxs[0]}), ShapeError);
}

TEST(DiscriminatorObjective, TotalIsSumOfTerms) {
  SeededRng rng(5);
  const EnsembleModel model = build_ensemble(2, 1, rng, 0.01, 0.05);
  const FakeBatch fb = sample_fake_batch(model.generator, 6, rng);
  DiscriminatorBatch b;
  b.real_x = fb.samples;
  b.real_y = {1, 0, 0, 0, 0, 0};
  b.fake_x = fb.samples;
  b.fake_y = fb.labels;
  b.aux_fake_x = fb.samples;
  b.aux_fake_y = fb.labels;
  const auto obj = discriminator_objective(model.discriminators[0], b, {});
  EXPECT_NEAR(obj.total, obj.adversarial.value + obj.auxiliary.value, 1e-15);
  EXPECT_EQ(obj.grads.size(), model.discriminators[0].parameters().size());
  b.aux_uses_real = false;
  const auto fake_only = discriminator_objective(model.discriminators[0], b, {});
  EXPECT_NEAR(fake_only.auxiliary.value,
              disc_auxiliary_loss(kNone, kNoLabels, obj.predictions.aux_fake_phi, b.aux_fake_y, {}).value, 1e-15);
}
