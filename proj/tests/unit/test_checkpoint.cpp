#include <bit>
#include <cstdlib>
#include <filesystem>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ealgan/checkpoint.hpp"
#include "ealgan/format.hpp"
#include "ealgan/metrics.hpp"

using namespace ealgan;

namespace {

Checkpoint sample_checkpoint(bool projection = true) {
  SeededRng rng(21);
  TrainConfig cfg;
  cfg.m = 3;
  cfg.seed = 77;
  cfg.rho = 0.1;
  cfg.fake_real = FakeRealRatio::parse("2:1");
  cfg.ablation = projection ? Ablation::none : Ablation::no_embedding;
  EnsembleModel model = build_ensemble(3, 3, rng, 0.01, 0.05, {4, projection});
  // Values that decimal text would not round-trip.
  model.discriminators[1].parameters()[0]->values()[0] = 0.1 + 0.2;
  model.generator.parameters()[1]->values()[2] = -5e-324;
  NormalizerState norm{{0.0, -1.0 / 3.0, 2.0}, {1.0, 1.0 / 7.0, 2.5}};
  return {std::move(model), cfg, norm};
}

void expect_same_model(const EnsembleModel& a, const EnsembleModel& b) {
  ASSERT_EQ(a.size(), b.size());
  const auto ga = a.generator.parameters(), gb = b.generator.parameters();
  ASSERT_EQ(ga.size(), gb.size());
  for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_EQ(*ga[i], *gb[i]);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.discriminators[k].learning_rate(), b.discriminators[k].learning_rate());
    EXPECT_EQ(a.discriminators[k].has_projection(), b.discriminators[k].has_projection());
    const auto pa = a.discriminators[k].parameters(), pb = b.discriminators[k].parameters();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(*pa[i], *pb[i]);
  }
}

}  // namespace

TEST(Format, HexAndShortestDecimalRoundTrip) {
  for (double v : {0.0, -0.0, 0.1, 1.0 / 3.0, 1e300, -5e-324, 123456.789}) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(double_from_hex(double_to_hex(v))), std::bit_cast<std::uint64_t>(v));
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(double_to_hex(1.0), "3ff0000000000000");
  EXPECT_EQ(format_double(0.75), "0.75");
  EXPECT_EQ(format_fixed(0.98765, 3), "0.988");
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
}

TEST(Checkpoint, StringRoundTripIsBitExact) {
  const Checkpoint c = sample_checkpoint();
  const std::string text = checkpoint_to_string(c);
  const Checkpoint back = checkpoint_from_string(text);
  expect_same_model(c.model, back.model);
  ASSERT_TRUE(back.normalizer.has_value());
  EXPECT_EQ(back.normalizer->min, c.normalizer->min);
  EXPECT_EQ(back.normalizer->max, c.normalizer->max);
  EXPECT_EQ(config_to_string(back.config), config_to_string(c.config));
  EXPECT_EQ(checkpoint_to_string(back), text);
}

TEST(Checkpoint, RoundTripWithoutProjectionOrNormalizer) {
  Checkpoint c = sample_checkpoint(false);
  c.normalizer.reset();
  const Checkpoint back = checkpoint_from_string(checkpoint_to_string(c));
  expect_same_model(c.model, back.model);
  EXPECT_FALSE(back.normalizer.has_value());
}

TEST(Checkpoint, LoadedModelScoresIdentically) {
  const Checkpoint c = sample_checkpoint();
  const auto path = std::filesystem::temp_directory_path() / "ealgan_ckpt_test.json";
  save_checkpoint(c, path);
  const Checkpoint back = load_checkpoint(path);
  std::filesystem::remove(path);
  const Matrix x{{0.1, 0.2, 0.3}, {0.9, 0.5, 0.0}};
  EXPECT_EQ(predict(c.model, x).scores, predict(back.model, x).scores);
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
}

TEST(Checkpoint, RejectsCorruptInput) {
  EXPECT_THROW(checkpoint_from_string("not json"), CheckpointError);
  EXPECT_THROW(checkpoint_from_string("{}"), CheckpointError);
  auto j = nlohmann::json::parse(checkpoint_to_string(sample_checkpoint()));
  j["version"] = 99;
  EXPECT_THROW(checkpoint_from_string(j.dump()), CheckpointError);
}

TEST(Checkpoint, ConfigTextRoundTrip) {
  TrainConfig c;
  c.m = 7;
  c.epochs = 12;
  c.rho = 0.07;
  c.gen_lr = 0.003;
  c.fake_real = FakeRealRatio::parse("1:0");
  c.seed = 123456789012345ull;
  c.ablation = Ablation::plain_loss;
  c.generator_depth = 5;
  c.frozen_context = true;
  const TrainConfig back = config_from_string(config_to_string(c));
  EXPECT_EQ(back.m, 7u);
  EXPECT_EQ(back.epochs, 12u);
  EXPECT_EQ(back.rho, 0.07);
  EXPECT_EQ(back.gen_lr, 0.003);
  EXPECT_EQ(back.fake_real.to_string(), "1:0");
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.ablation, Ablation::plain_loss);
  EXPECT_EQ(back.generator_depth, 5);
  EXPECT_TRUE(back.frozen_context);
  EXPECT_EQ(config_to_string(back), config_to_string(c));
}
