#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "ealgan/dataset.hpp"
#include "ealgan/networks.hpp"
#include "ealgan/training.hpp"

namespace ealgan {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;

// A trained ensemble with what is needed to score new raw data. Doubles are
// stored as IEEE-754 hex so a save/load round trip is bit-exact and two
// identical models serialize to identical bytes.
struct Checkpoint {
  EnsembleModel model;
  TrainConfig config;
  std::optional<NormalizerState> normalizer;
};

std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(const std::string& text);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Canonical text form of a config, also used for spec hashing.
std::string config_to_string(const TrainConfig& cfg);
TrainConfig config_from_string(const std::string& text);

}  // namespace ealgan
