#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "experiment.hpp"

namespace fs = std::filesystem;
using namespace ealgan;
using namespace ealgan::app;

namespace {

struct CliRun {
  int code = -1;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ealgan_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// The one experiment directory under `root`.
fs::path only_dir(const fs::path& root) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path());
  EXPECT_EQ(dirs.size(), 1u);
  return dirs.empty() ? root : dirs.front();
}

fs::path find_file(const fs::path& root, const std::string& name) {
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.path().filename() == name) return e.path();
  return {};
}

// Small enough to run in well under a second per training run.
std::vector<std::string> tiny(const fs::path& out) {
  return {"--synth", "single", "--n", "1000", "--epochs", "1", "--m", "1", "--runs", "1", "--out", out.string()};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--no-such-flag", "1"}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--synth", "single", "--rho", "abc"}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--synth", "single", "--ablation", "nope"}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--synth", "single", "--fake-real", "0:0"}).code, kExitUsage);
  EXPECT_EQ(cli({"sweep", "--synth", "single", "--param", "depth"}).code, kExitUsage);
  EXPECT_EQ(cli({"help"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, MissingDatasetExitsTwo) {
  const CliRun r = cli({"train", "--data", "/nonexistent/file.csv", "--runs", "1"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("not found"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"train", "--runs", "1"}).code, kExitUsage);  // no data source
  EXPECT_EQ(cli({"eval", "--checkpoint", "/nonexistent.json", "--data", "/nonexistent.csv"}).code, kExitUsage);
}

TEST(Cli, TrainWritesArtifactsAndIsIdempotent) {
  const fs::path out = scratch("train");
  const CliRun r = cli(concat({"train"}, tiny(out)));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("run 0"), std::string::npos) << r.out;
  const fs::path dir = only_dir(out);
  for (const char* f : {"spec.json", "runs.csv", "summary.json", "run_0/metrics.csv", "run_0/history.csv",
                        "run_0/checkpoint.json"}) {
    EXPECT_TRUE(fs::is_regular_file(dir / f)) << f;
  }
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_TRUE(summary.at("mean").contains("auc")) << summary.dump();
  // 60% of 1000 rows in batches of 128: 4 iterations.
  EXPECT_EQ(line_count(slurp(dir / "run_0/history.csv")), 1u + 4u);
  // Same spec again: identical bytes, so no conflict.
  EXPECT_EQ(cli(concat({"train"}, tiny(out))).code, kExitOk);
}

TEST(Cli, ArtifactConflictIsARuntimeError) {
  const fs::path out = scratch("conflict");
  const fs::path f = out / "a.txt";
  write_artifact(f, "one");
  EXPECT_NO_THROW(write_artifact(f, "one"));
  EXPECT_THROW(write_artifact(f, "two"), ArtifactConflict);

  ASSERT_EQ(cli(concat({"train"}, tiny(out / "exp"))).code, kExitOk);
  const fs::path metrics = find_file(out / "exp", "metrics.csv");
  ASSERT_FALSE(metrics.empty());
  std::ofstream(metrics) << "tampered\n";
  const CliRun r = cli(concat({"train"}, tiny(out / "exp")));
  EXPECT_EQ(r.code, kExitRuntime);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, EvalScoresWithSavedCheckpoint) {
  const fs::path out = scratch("eval");
  const fs::path csv = out / "data.csv";
  ASSERT_EQ(cli({"synth", "--synth", "single", "--n", "1000", "--file", csv.string()}).code, kExitOk);
  ASSERT_EQ(line_count(slurp(csv)), 1001u);
  ASSERT_EQ(cli(concat({"train", "--data", csv.string(), "--label-col", "label"},
                       {"--epochs", "1", "--m", "1", "--runs", "1", "--out", (out / "exp").string()}))
                .code,
            kExitOk);
  const fs::path ckpt = find_file(out / "exp", "checkpoint.json");
  ASSERT_FALSE(ckpt.empty());
  const fs::path grid = out / "grid.csv";
  const CliRun r = cli({"eval", "--checkpoint", ckpt.string(), "--data", csv.string(), "--label-col", "label",
                        "--grid", "5", "--grid-out", grid.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto report = nlohmann::json::parse(r.out.substr(0, r.out.find("grid:")));
  EXPECT_GE(report.at("auc").get<double>(), 0.0);
  EXPECT_EQ(line_count(slurp(grid)), 26u);
}

TEST(Cli, SweepRowCounts) {
  const std::pair<const char*, std::size_t> cases[] = {{"rho", 10}, {"gen_depth", 3}, {"n_discriminators", 11}};
  for (const auto& [param, rows] : cases) {
    const fs::path out = scratch(std::string("sweep_") + param);
    const CliRun r = cli(concat({"sweep", "--param", param}, tiny(out)));
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(line_count(r.out), rows) << param;
    const fs::path csv = find_file(out, std::string("sweep_") + param + ".csv");
    ASSERT_FALSE(csv.empty()) << param;
    EXPECT_EQ(line_count(slurp(csv)), rows + 1) << param;
  }
}

TEST(Cli, AblateHasFiveRows) {
  const fs::path out = scratch("ablate");
  const CliRun r = cli(concat({"ablate"}, tiny(out)));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string csv = slurp(find_file(out, "ablation.csv"));
  EXPECT_EQ(line_count(csv), 6u);
  for (const char* m : {"full", "no_embedding", "single_disc", "plain_loss", "random_sampling"})
    EXPECT_NE(csv.find(std::string("\n") + m + ","), std::string::npos) << m;
}

TEST(Cli, RatioSweepDefaultsToEightRatios) {
  const fs::path out = scratch("ratio");
  const CliRun r = cli(concat({"ratio-sweep"}, tiny(out)));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string csv = slurp(find_file(out, "ratio_sweep.csv"));
  EXPECT_EQ(line_count(csv), 9u);
  EXPECT_NE(csv.find("\n1:0,"), std::string::npos);
  EXPECT_NE(csv.find("\n100:1,"), std::string::npos);
  EXPECT_EQ(cli(concat({"ratio-sweep", "--ratios", "1:1,bad"}, tiny(out))).code, kExitUsage);
}

TEST(Cli, ReportRanksMethods) {
  const fs::path dir = scratch("report");
  const fs::path f = dir / "scores.csv";
  std::ofstream(f) << "dataset,a,b,c\nd1,0.9,0.8,0.7\nd2,0.5,0.5,0.9\nd3,0.1,0.3,0.2\n";
  const CliRun r = cli({"report", "--scores", f.string(), "--qa", "2.343"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("c,2\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("critical_difference,"), std::string::npos);
  std::ofstream(f) << "dataset,a,b\nd1,0.9,x\n";
  EXPECT_EQ(cli({"report", "--scores", f.string()}).code, kExitUsage);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path dir = scratch("config");
  const fs::path cfg = dir / "exp.cfg";
  std::ofstream(cfg) << "# tiny run\nsynth=single\nsynth_n=1000\nepochs=1\nm=2\nruns=1\n";
  ExperimentSpec spec;
  for (const auto& [k, v] : read_config_file(cfg)) apply_setting(spec, k, v);
  EXPECT_EQ(spec.train.m, 2u);
  EXPECT_EQ(spec.runs, 1u);
  EXPECT_THROW(apply_setting(spec, "no_such_key", "1"), ConfigError);
  const CliRun r = cli({"train", "--config", cfg.string(), "--m", "1", "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto s = nlohmann::json::parse(slurp(only_dir(dir / "o") / "spec.json"));
  EXPECT_NE(s.dump().find("\"m\":1"), std::string::npos) << s.dump();
}
