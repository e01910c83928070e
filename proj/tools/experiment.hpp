#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ealgan/dataset.hpp"
#include "ealgan/metrics.hpp"
#include "ealgan/synth.hpp"
#include "ealgan/training.hpp"

namespace ealgan::app {

// Bad flags, config keys or values; maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An artifact already exists with different content.
class ArtifactConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataSource {
  std::optional<std::filesystem::path> csv;
  std::string label_column;
  std::optional<SynthConfig> synth;  // run r draws with seed synth.seed + base seed + r
};

struct ExperimentSpec {
  DataSource data;
  TrainConfig train;  // train.seed is the base seed; run r uses base + r
  std::size_t runs = 10;
  double train_fraction = 0.6;
  std::filesystem::path out = "out";

  void validate() const;  // throws ConfigError
  // Stable hash over everything that affects results (including CSV bytes).
  std::string hash() const;
  std::string describe() const;
};

// key=value lines; '#' starts a comment. Unknown keys are errors.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);
void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value);

struct RunResult {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  MetricsReport test;
  TrainHistory history;
  std::string checkpoint;  // serialized
};

struct Summary {
  std::vector<RunResult> runs;
  double mean_auc = 0.0, std_auc = 0.0;
  double mean_gmean = 0.0, std_gmean = 0.0;
};

Dataset load_run_data(const ExperimentSpec& spec, std::size_t run);
RunResult run_once(const ExperimentSpec& spec, std::size_t run);
Summary run_all(const ExperimentSpec& spec, const std::function<void(const RunResult&)>& progress = {});
Summary summarize(std::vector<RunResult> runs);

std::string runs_csv(const Summary& s);
std::string summary_json(const ExperimentSpec& spec, const Summary& s);

// Writes `content` unless an identical file is already there; a differing
// file raises ArtifactConflict.
void write_artifact(const std::filesystem::path& path, const std::string& content);
// out/<hash>/ with spec.json, runs.csv, summary.json and run_<r>/ files.
std::filesystem::path write_experiment(const ExperimentSpec& spec, const Summary& s);

}  // namespace ealgan::app
