#include <benchmark/benchmark.h>

#include "ealgan/active_sampling.hpp"
#include "ealgan/losses.hpp"
#include "ealgan/synth.hpp"
#include "ealgan/training.hpp"

using namespace ealgan;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, SeededRng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  SeededRng rng(1);
  const Matrix a = random_matrix(128, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * 128 * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Matmul)->Arg(4)->Arg(32)->Arg(128)->Arg(320);

void BM_DiscriminatorForwardBackward(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  SeededRng rng(2);
  const DiscriminatorNet disc(d, 0.02, true, rng);
  Matrix x(128, d);
  for (double& v : x.values()) v = rng.uniform();
  Labels y(128);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 2);
  const std::vector<double> g(128, 0.01);
  for (auto _ : state) {
    DiscriminatorTape tape;
    discriminator_forward(disc, x, y, &tape);
    benchmark::DoNotOptimize(discriminator_backward(disc, tape, g, g, true));
  }
}
BENCHMARK(BM_DiscriminatorForwardBackward)->Arg(2)->Arg(32)->Arg(160);

void BM_GeneratorStep(benchmark::State& state) {
  SeededRng rng(3);
  const EnsembleModel model = build_ensemble(static_cast<std::size_t>(state.range(0)), 10, rng, 0.01, 0.05);
  for (auto _ : state) {
    GeneratorTape tape;
    const FakeBatch fb = sample_fake_batch(model.generator, 128, rng, true, &tape);
    const auto ctx = generator_contexts(model, fb.samples, fb.labels);
    const auto obj = gen_total_loss(model, fb.samples, fb.labels, ctx);
    benchmark::DoNotOptimize(generator_backward(model.generator, tape, obj.grad_fake));
  }
}
BENCHMARK(BM_GeneratorStep)->Arg(2)->Arg(32);

// One epoch of the full loop on the default synthetic set (7 iterations).
void BM_TrainEpoch(benchmark::State& state) {
  SynthConfig sc;
  const Dataset data = normalize_fit_apply(synthesize(sc)).train;
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train(data, cfg));
}
BENCHMARK(BM_TrainEpoch)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_ActiveSelect(benchmark::State& state) {
  SeededRng rng(4);
  std::vector<double> s(static_cast<std::size_t>(state.range(0)));
  for (double& v : s) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(active_select(s, 0.05));
}
BENCHMARK(BM_ActiveSelect)->Arg(128)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
