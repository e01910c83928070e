#include "experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ealgan/checkpoint.hpp"
#include "ealgan/format.hpp"

namespace ealgan::app {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (value.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean '" + value + "' for " + key);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SynthConfig& synth_of(ExperimentSpec& spec) {
  if (!spec.data.synth) spec.data.synth = SynthConfig{};
  return *spec.data.synth;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for a single run.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  auto& t = spec.train;
  try {
    if (key == "dataset" || key == "csv") {
      spec.data.csv = value;
      spec.data.synth.reset();
    } else if (key == "label_col") {
      spec.data.label_column = value;
    } else if (key == "synth") {
      const auto type = parse_cluster_type(value);
      if (!type) throw ConfigError("unknown synthetic type '" + value + "'");
      synth_of(spec).cluster_type = *type;
      spec.data.csv.reset();
    } else if (key == "synth_n") {
      synth_of(spec).n = parse_number<std::size_t>(key, value);
    } else if (key == "synth_d") {
      synth_of(spec).d = parse_number<std::size_t>(key, value);
    } else if (key == "synth_ratio") {
      synth_of(spec).anomaly_ratio = parse_number<double>(key, value);
    } else if (key == "synth_seed") {
      synth_of(spec).seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "synth_margin") {
      synth_of(spec).anomaly_margin = parse_number<double>(key, value);
    } else if (key == "m") {
      t.m = parse_number<std::size_t>(key, value);
    } else if (key == "epochs") {
      t.epochs = parse_number<std::size_t>(key, value);
    } else if (key == "batch_size") {
      t.batch_size = parse_number<std::size_t>(key, value);
    } else if (key == "rho") {
      t.rho = parse_number<double>(key, value);
    } else if (key == "gen_lr") {
      t.gen_lr = parse_number<double>(key, value);
    } else if (key == "disc_lr_lo") {
      t.disc_lr_lo = parse_number<double>(key, value);
    } else if (key == "disc_lr_hi") {
      t.disc_lr_hi = parse_number<double>(key, value);
    } else if (key == "fake_real") {
      t.fake_real = FakeRealRatio::parse(value);
    } else if (key == "seed") {
      t.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "ablation") {
      t.ablation = parse_ablation(value);
    } else if (key == "generator_depth") {
      t.generator_depth = parse_number<int>(key, value);
    } else if (key == "frozen_context") {
      t.frozen_context = parse_bool(key, value);
    } else if (key == "runs") {
      spec.runs = parse_number<std::size_t>(key, value);
    } else if (key == "train_fraction") {
      spec.train_fraction = parse_number<double>(key, value);
    } else if (key == "out") {
      spec.out = value;
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void ExperimentSpec::validate() const {
  if (data.csv.has_value() == data.synth.has_value()) {
    throw ConfigError("exactly one data source is required (--data or --synth)");
  }
  if (data.csv && !fs::is_regular_file(*data.csv)) {
    throw ConfigError("dataset not found: " + data.csv->string());
  }
  if (data.synth) {
    try {
      data.synth->validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must be in (0, 1)");
  }
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string ExperimentSpec::describe() const {
  ordered_json j;
  if (data.csv) {
    j["data"]["csv"] = data.csv->string();
    j["data"]["label_col"] = data.label_column;
  } else {
    const auto& s = *data.synth;
    j["data"]["synth"] = to_string(s.cluster_type);
    j["data"]["n"] = s.n;
    j["data"]["d"] = s.d;
    j["data"]["anomaly_ratio"] = s.anomaly_ratio;
    j["data"]["seed"] = s.seed;
    j["data"]["anomaly_margin"] = s.anomaly_margin;
  }
  j["train"] = ordered_json::parse(config_to_string(train));
  j["runs"] = runs;
  j["train_fraction"] = train_fraction;
  return j.dump(2) + "\n";
}

std::string ExperimentSpec::hash() const {
  std::string key = describe();
  // Content, not path, identifies a CSV dataset.
  if (data.csv) key += hex64(fnv1a64(read_file(*data.csv)));
  return hex64(fnv1a64(key));
}

Dataset load_run_data(const ExperimentSpec& spec, std::size_t run) {
  if (spec.data.csv) return load_csv(*spec.data.csv, spec.data.label_column);
  SynthConfig s = *spec.data.synth;
  s.seed += spec.train.seed + run;
  return synthesize(s);
}

RunResult run_once(const ExperimentSpec& spec, std::size_t run) {
  RunResult r;
  r.run = run;
  r.seed = spec.train.seed + run;
  const Dataset data = load_run_data(spec, run);
  const Split parts = split(data, spec.train_fraction, r.seed, true);
  const NormalizedSets norm = normalize_fit_apply(parts.train, {parts.test});
  TrainConfig cfg = spec.train;
  cfg.seed = r.seed;
  TrainResult trained = train(norm.train, cfg);
  r.test = evaluate(trained.model, norm.others.front());
  r.history = std::move(trained.history);
  r.checkpoint = checkpoint_to_string(Checkpoint{std::move(trained.model), cfg, norm.state});
  return r;
}

Summary summarize(std::vector<RunResult> runs) {
  Summary s;
  s.runs = std::move(runs);
  std::vector<double> aucs, gmeans;
  for (const auto& r : s.runs) {
    aucs.push_back(r.test.auc);
    gmeans.push_back(r.test.gmean);
  }
  s.mean_auc = mean_of(aucs);
  s.std_auc = std_of(aucs);
  s.mean_gmean = mean_of(gmeans);
  s.std_gmean = std_of(gmeans);
  return s;
}

Summary run_all(const ExperimentSpec& spec, const std::function<void(const RunResult&)>& progress) {
  spec.validate();
  std::vector<RunResult> runs;
  for (std::size_t r = 0; r < spec.runs; ++r) {
    runs.push_back(run_once(spec, r));
    if (progress) progress(runs.back());
  }
  return summarize(std::move(runs));
}

std::string runs_csv(const Summary& s) {
  std::string out = "run,seed," + metrics_csv_header() + ",best_epoch,labels_revealed\n";
  for (const auto& r : s.runs) {
    out += std::to_string(r.run) + "," + std::to_string(r.seed) + "," + metrics_csv_row(r.test) + "," +
           std::to_string(r.history.best_epoch) + "," + std::to_string(r.history.labels_revealed) + "\n";
  }
  out += "mean,," + format_double(s.mean_auc) + "," + format_double(s.mean_gmean) + ",,,,,,\n";
  return out;
}

std::string summary_json(const ExperimentSpec& spec, const Summary& s) {
  ordered_json j;
  j["spec_hash"] = spec.hash();
  auto& rows = j["runs"] = ordered_json::array();
  for (const auto& r : s.runs) {
    ordered_json row;
    row["run"] = r.run;
    row["seed"] = r.seed;
    row["test"] = ordered_json::parse(to_json(r.test));
    row["best_epoch"] = r.history.best_epoch;
    row["labels_revealed"] = r.history.labels_revealed;
    row["samples_visited"] = r.history.samples_visited;
    rows.push_back(std::move(row));
  }
  j["mean"]["auc"] = s.mean_auc;
  j["mean"]["gmean"] = s.mean_gmean;
  j["std"]["auc"] = s.std_auc;
  j["std"]["gmean"] = s.std_gmean;
  return j.dump(2) + "\n";
}

void write_artifact(const fs::path& path, const std::string& content) {
  if (fs::exists(path)) {
    if (read_file(path) == content) return;
    throw ArtifactConflict("refusing to overwrite " + path.string() + " with different content");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

fs::path write_experiment(const ExperimentSpec& spec, const Summary& s) {
  const fs::path dir = spec.out / spec.hash();
  write_artifact(dir / "spec.json", spec.describe());
  for (const auto& r : s.runs) {
    const fs::path rd = dir / ("run_" + std::to_string(r.run));
    write_artifact(rd / "metrics.csv", metrics_csv_header() + "\n" + metrics_csv_row(r.test) + "\n");
    write_artifact(rd / "history.csv", r.history.to_csv());
    write_artifact(rd / "checkpoint.json", r.checkpoint);
  }
  write_artifact(dir / "runs.csv", runs_csv(s));
  write_artifact(dir / "summary.json", summary_json(spec, s));
  return dir;
}

}  // namespace ealgan::app
