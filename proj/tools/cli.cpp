#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "ealgan/checkpoint.hpp"
#include "ealgan/format.hpp"
#include "experiment.hpp"

namespace ealgan::app {

namespace fs = std::filesystem;

namespace {

// Flag name → config key for the experiment options every subcommand shares.
const std::vector<std::pair<std::string, std::string>> kSpecFlags = {
    {"--data", "dataset"},       {"--label-col", "label_col"},   {"--synth", "synth"},
    {"--n", "synth_n"},          {"--d", "synth_d"},             {"--ratio", "synth_ratio"},
    {"--margin", "synth_margin"}, {"--synth-seed", "synth_seed"}, {"--seed", "seed"},
    {"--runs", "runs"},          {"--out", "out"},               {"--ablation", "ablation"},
    {"--m", "m"},                {"--rho", "rho"},               {"--epochs", "epochs"},
    {"--fake-real", "fake_real"}, {"--batch-size", "batch_size"}, {"--gen-depth", "generator_depth"},
    {"--gen-lr", "gen_lr"},      {"--frozen-context", "frozen_context"},
    {"--train-fraction", "train_fraction"},
};

struct SpecOptions {
  std::string config;
  std::map<std::string, std::string> values;  // flag → raw value
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config, "key=value config file");
    for (const auto& [flag, key] : kSpecFlags) {
      options.emplace_back(flag, sub->add_option(flag, values[flag], "config key " + key));
    }
  }

  // Config file first, flags override.
  ExperimentSpec build() const {
    ExperimentSpec spec;
    if (!config.empty()) {
      for (const auto& [k, v] : read_config_file(config)) apply_setting(spec, k, v);
    }
    for (const auto& [flag, opt] : options) {
      if (opt->count() == 0) continue;
      const auto key = std::find_if(kSpecFlags.begin(), kSpecFlags.end(),
                                    [&](const auto& p) { return p.first == flag; })->second;
      apply_setting(spec, key, values.at(flag));
    }
    return spec;
  }
};

std::string summary_row(const std::string& label, const Summary& s) {
  return label + "," + format_double(s.mean_auc) + "," + format_double(s.std_auc) + "," +
         format_double(s.mean_gmean) + "," + format_double(s.std_gmean) + "\n";
}

const std::string kSummaryHeader = "mean_auc,std_auc,mean_gmean,std_gmean";

int cmd_train(const ExperimentSpec& spec, std::ostream& out) {
  const Summary s = run_all(spec, [&](const RunResult& r) {
    out << "run " << r.run << " seed " << r.seed << " auc " << format_fixed(r.test.auc, 4) << " gmean "
        << format_fixed(r.test.gmean, 4) << " best_epoch " << r.history.best_epoch << "\n";
  });
  const fs::path dir = write_experiment(spec, s);
  out << "mean auc " << format_fixed(s.mean_auc, 4) << " ± " << format_fixed(s.std_auc, 4) << ", gmean "
      << format_fixed(s.mean_gmean, 4) << " ± " << format_fixed(s.std_gmean, 4) << "\n";
  out << "artifacts: " << dir.string() << "\n";
  return kExitOk;
}

std::vector<std::string> sweep_values(const std::string& param) {
  std::vector<std::string> v;
  if (param == "n_discriminators") {
    for (int m = 1; m <= 21; m += 2) v.push_back(std::to_string(m));
  } else if (param == "gen_depth") {
    v = {"3", "4", "5"};
  } else if (param == "rho") {
    for (int i = 0; i < 10; ++i) v.push_back(format_double((5.0 + 10.0 * i) / 100.0));
  } else {
    throw ConfigError("unknown sweep parameter '" + param + "' (n_discriminators, gen_depth, rho)");
  }
  return v;
}

int cmd_sweep(const ExperimentSpec& base, const std::string& param, std::ostream& out) {
  base.validate();
  const std::string key = param == "n_discriminators" ? "m" : param == "gen_depth" ? "generator_depth" : "rho";
  std::string csv = param + "," + kSummaryHeader + "\n";
  for (const auto& value : sweep_values(param)) {
    ExperimentSpec spec = base;
    apply_setting(spec, key, value);
    const Summary s = run_all(spec);
    write_experiment(spec, s);
    const std::string row = summary_row(value, s);
    out << row << std::flush;
    csv += row;
  }
  write_artifact(base.out / base.hash() / ("sweep_" + param + ".csv"), csv);
  return kExitOk;
}

int cmd_ablate(const ExperimentSpec& base, std::ostream& out) {
  base.validate();
  std::string csv = "method," + kSummaryHeader + ",factors_forced_to_1,ordering_ok\n";
  double full_auc = 0.0;
  bool all_ok = true;
  for (auto a : kAllAblations) {
    ExperimentSpec spec = base;
    spec.train.ablation = a;
    const Summary s = run_all(spec);
    write_experiment(spec, s);
    if (a == Ablation::none) full_auc = s.mean_auc;
    const bool ok = a == Ablation::none || full_auc >= s.mean_auc - 0.02;
    all_ok = all_ok && ok;
    const std::string name = a == Ablation::none ? "full" : to_string(a);
    std::string row = summary_row(name, s);
    row.pop_back();
    row += std::string(",") + (a == Ablation::plain_loss ? "yes" : "no") + "," + (ok ? "yes" : "no") + "\n";
    out << row << std::flush;
    csv += row;
  }
  write_artifact(base.out / base.hash() / "ablation.csv", csv);
  if (!all_ok) out << "ordering check FAILED: a variant beats the full model by more than 0.02 AUC\n";
  return kExitOk;
}

int cmd_ratio_sweep(const ExperimentSpec& base, const std::string& ratios, std::ostream& out) {
  base.validate();
  std::vector<FakeRealRatio> parsed;
  std::vector<std::string> labels;
  std::stringstream ss(ratios);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      parsed.push_back(FakeRealRatio::parse(item));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    labels.push_back(item);
  }
  if (parsed.empty()) throw ConfigError("no ratios given");
  std::string csv = "fake_real," + kSummaryHeader + "\n";
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    ExperimentSpec spec = base;
    spec.train.fake_real = parsed[i];
    const Summary s = run_all(spec);
    write_experiment(spec, s);
    const std::string row = summary_row(labels[i], s);
    out << row << std::flush;
    csv += row;
  }
  write_artifact(base.out / base.hash() / "ratio_sweep.csv", csv);
  return kExitOk;
}

int cmd_synth(const ExperimentSpec& spec, const std::string& path, std::ostream& out) {
  if (!spec.data.synth) throw ConfigError("synth needs --synth <single|multi_cluster|multi_density>");
  if (path.empty()) throw ConfigError("synth needs --file <path>");
  try {
    spec.data.synth->validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  SynthConfig cfg = *spec.data.synth;
  cfg.seed += spec.train.seed;
  const Dataset data = synthesize(cfg);
  write_artifact(path, to_csv(data));
  out << "wrote " << data.size() << " rows (" << data.anomaly_count() << " anomalies) to " << path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path, const std::string& label_col,
             std::size_t grid, const std::string& grid_out, std::ostream& out) {
  if (!fs::is_regular_file(ckpt_path)) throw ConfigError("checkpoint not found: " + ckpt_path);
  if (!fs::is_regular_file(data_path)) throw ConfigError("dataset not found: " + data_path);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  Dataset data = load_csv(data_path, label_col);
  if (data.dim() != ckpt.model.data_dim()) {
    throw ConfigError("dataset has " + std::to_string(data.dim()) + " features, checkpoint expects " +
                      std::to_string(ckpt.model.data_dim()));
  }
  if (ckpt.normalizer) data.features = ckpt.normalizer->apply(data.features);
  out << to_json(evaluate(ckpt.model, data)) << "\n";
  if (grid > 0) {
    Box2D box;
    box.x_min = box.y_min = 1e300;
    box.x_max = box.y_max = -1e300;
    for (std::size_t i = 0; i < data.size(); ++i) {
      box.x_min = std::min(box.x_min, data.features(i, 0));
      box.x_max = std::max(box.x_max, data.features(i, 0));
      box.y_min = std::min(box.y_min, data.features(i, 1));
      box.y_max = std::max(box.y_max, data.features(i, 1));
    }
    write_artifact(grid_out, grid_to_csv(boundary_grid(ckpt.model, box, grid)));
    out << "grid: " << grid_out << "\n";
  }
  return kExitOk;
}

int cmd_report(const std::string& path, double qa, bool has_qa, const std::string& out_path,
               std::ostream& out) {
  if (!fs::is_regular_file(path)) throw ConfigError("scores file not found: " + path);
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> methods;
  std::vector<double> values;
  std::size_t rows = 0;
  auto split_line = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ls(l);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    return cells;
  };
  if (!std::getline(in, line)) throw ConfigError("scores file is empty");
  auto header = split_line(line);
  if (header.size() < 3) throw ConfigError("scores file needs a name column and at least two methods");
  methods.assign(header.begin() + 1, header.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                        " cells");
    }
    for (std::size_t c = 1; c < cells.size(); ++c) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cells[c], &used));
        if (used != cells[c].size()) throw std::invalid_argument(cells[c]);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad score '" + cells[c] + "'");
      }
    }
    ++rows;
  }
  if (rows == 0) throw ConfigError("scores file has no data rows");
  const RankTable t = friedman_ranks(Matrix(rows, methods.size(), std::move(values)));
  std::string csv = "method,average_rank\n";
  for (std::size_t j = 0; j < methods.size(); ++j) {
    csv += methods[j] + "," + format_double(t.average_ranks[j]) + "\n";
  }
  if (has_qa) csv += "critical_difference," + format_double(nemenyi_cd(methods.size(), rows, qa)) + "\n";
  out << csv;
  if (!out_path.empty()) write_artifact(out_path, csv);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ensemble active-learning GAN anomaly detector", "ealgan"};
  app.require_subcommand(1);

  SpecOptions train_opts, sweep_opts, ablate_opts, ratio_opts, synth_opts;
  auto* train = app.add_subcommand("train", "train and evaluate over several runs");
  train_opts.attach(train);

  auto* sweep = app.add_subcommand("sweep", "sweep one hyper-parameter");
  sweep_opts.attach(sweep);
  std::string sweep_param;
  sweep->add_option("--param", sweep_param, "n_discriminators, gen_depth or rho")->required();

  auto* ablate = app.add_subcommand("ablate", "full model against each ablation variant");
  ablate_opts.attach(ablate);

  auto* ratio = app.add_subcommand("ratio-sweep", "sweep the fake:real ratio of the auxiliary loss");
  ratio_opts.attach(ratio);
  std::string ratios = "1:0,0:1,1:1,5:1,10:1,20:1,50:1,100:1";
  ratio->add_option("--ratios", ratios, "comma-separated f:r list");

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset as CSV");
  synth_opts.attach(synth);
  std::string synth_file;
  synth->add_option("--file", synth_file, "output CSV path")->required();

  auto* eval = app.add_subcommand("eval", "score a CSV with a saved checkpoint");
  std::string ckpt_path, eval_data, eval_label, grid_out = "grid.csv";
  std::size_t grid = 0;
  eval->add_option("--checkpoint", ckpt_path, "checkpoint.json from a train run")->required();
  eval->add_option("--data", eval_data, "CSV to score")->required();
  eval->add_option("--label-col", eval_label, "label column name or index");
  eval->add_option("--grid", grid, "also export a grid x grid decision surface (2-D only)");
  eval->add_option("--grid-out", grid_out, "grid CSV path");

  auto* report = app.add_subcommand("report", "Friedman ranks and Nemenyi CD from a scores table");
  std::string scores_path, report_out;
  double qa = 0.0;
  report->add_option("--scores", scores_path, "CSV: name column then one column per method")->required();
  auto* qa_opt = report->add_option("--qa", qa, "critical value q_alpha for the Nemenyi test");
  report->add_option("--out", report_out, "also write the table here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_opts.build(), out);
    if (*sweep) return cmd_sweep(sweep_opts.build(), sweep_param, out);
    if (*ablate) return cmd_ablate(ablate_opts.build(), out);
    if (*ratio) return cmd_ratio_sweep(ratio_opts.build(), ratios, out);
    if (*synth) return cmd_synth(synth_opts.build(), synth_file, out);
    if (*eval) return cmd_eval(ckpt_path, eval_data, eval_label, grid, grid_out, out);
    if (*report) return cmd_report(scores_path, qa, qa_opt->count() > 0, report_out, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ealgan::app
