#include "ealgan/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ealgan/format.hpp"

namespace ealgan {

using nlohmann::ordered_json;

namespace {

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  auto& data = j["data"] = ordered_json::array();
  for (double v : m.values()) data.push_back(double_to_hex(v));
  return j;
}

Matrix matrix_from_json(const ordered_json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto& data = j.at("data");
  if (data.size() != rows * cols) {
    throw CheckpointError("checkpoint: matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " has " + std::to_string(data.size()) + " values");
  }
  std::vector<double> values;
  values.reserve(data.size());
  for (const auto& v : data) values.push_back(double_from_hex(v.get<std::string>()));
  return Matrix(rows, cols, std::move(values));
}

template <typename Params>
ordered_json params_to_json(const Params& params) {
  auto out = ordered_json::array();
  for (const Matrix* p : params) out.push_back(matrix_to_json(*p));
  return out;
}

std::vector<Matrix> params_from_json(const ordered_json& j) {
  std::vector<Matrix> out;
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

ordered_json config_json(const TrainConfig& c) {
  ordered_json j;
  j["m"] = c.m;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["rho"] = c.rho;
  j["gen_lr"] = c.gen_lr;
  j["disc_lr_lo"] = c.disc_lr_lo;
  j["disc_lr_hi"] = c.disc_lr_hi;
  j["fake_real"] = c.fake_real.to_string();
  j["seed"] = c.seed;
  j["ablation"] = to_string(c.ablation);
  j["generator_depth"] = c.generator_depth;
  j["frozen_context"] = c.frozen_context;
  return j;
}

TrainConfig config_parse(const ordered_json& j) {
  TrainConfig c;
  c.m = j.at("m").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.rho = j.at("rho").get<double>();
  c.gen_lr = j.at("gen_lr").get<double>();
  c.disc_lr_lo = j.at("disc_lr_lo").get<double>();
  c.disc_lr_hi = j.at("disc_lr_hi").get<double>();
  c.fake_real = FakeRealRatio::parse(j.at("fake_real").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.ablation = parse_ablation(j.at("ablation").get<std::string>());
  c.generator_depth = j.at("generator_depth").get<int>();
  c.frozen_context = j.at("frozen_context").get<bool>();
  return c;
}

ordered_json hex_array(const std::vector<double>& v) {
  auto out = ordered_json::array();
  for (double x : v) out.push_back(double_to_hex(x));
  return out;
}

std::vector<double> hex_vector(const ordered_json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(double_from_hex(v.get<std::string>()));
  return out;
}

}  // namespace

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  const auto& model = ckpt.model;
  ordered_json j;
  j["format"] = "ealgan-checkpoint";
  j["version"] = kCheckpointVersion;
  j["config"] = config_json(ckpt.config);
  if (ckpt.normalizer) {
    j["normalizer"]["min"] = hex_array(ckpt.normalizer->min);
    j["normalizer"]["max"] = hex_array(ckpt.normalizer->max);
  } else {
    j["normalizer"] = nullptr;
  }
  j["data_dim"] = model.data_dim();
  j["generator"]["depth"] = model.generator.depth();
  j["generator"]["params"] = params_to_json(model.generator.parameters());
  auto& discs = j["discriminators"] = ordered_json::array();
  for (const auto& d : model.discriminators) {
    ordered_json dj;
    dj["learning_rate"] = double_to_hex(d.learning_rate());
    dj["projection"] = d.has_projection();
    dj["params"] = params_to_json(d.parameters());
    discs.push_back(std::move(dj));
  }
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    if (j.at("format").get<std::string>() != "ealgan-checkpoint") {
      throw CheckpointError("checkpoint: not an ealgan checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto d = j.at("data_dim").get<std::size_t>();
    // Construction draws throwaway weights; every value is overwritten below.
    SeededRng scratch(0);
    GeneratorNet gen(d, j.at("generator").at("depth").get<int>(), scratch);
    gen.assign_parameters(params_from_json(j.at("generator").at("params")));
    std::vector<DiscriminatorNet> discs;
    for (const auto& dj : j.at("discriminators")) {
      DiscriminatorNet disc(d, double_from_hex(dj.at("learning_rate").get<std::string>()),
                            dj.at("projection").get<bool>(), scratch);
      disc.assign_parameters(params_from_json(dj.at("params")));
      discs.push_back(std::move(disc));
    }
    Checkpoint ckpt{EnsembleModel{std::move(gen), std::move(discs)}, config_parse(j.at("config")),
                    std::nullopt};
    const auto& norm = j.at("normalizer");
    if (!norm.is_null()) {
      NormalizerState s;
      s.min = hex_vector(norm.at("min"));
      s.max = hex_vector(norm.at("max"));
      if (s.min.size() != d || s.max.size() != d) {
        throw CheckpointError("checkpoint: normalizer width does not match data_dim");
      }
      ckpt.normalizer = std::move(s);
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint: malformed JSON: ") + e.what());
  } catch (const ShapeError& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << checkpoint_to_string(ckpt);
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

std::string config_to_string(const TrainConfig& cfg) { return config_json(cfg).dump(); }

TrainConfig config_from_string(const std::string& text) {
  try {
    return config_parse(ordered_json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

}  // namespace ealgan
