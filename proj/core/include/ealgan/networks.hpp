#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ealgan/dataset.hpp"
#include "ealgan/layers.hpp"
#include "ealgan/matrix.hpp"
#include "ealgan/rng.hpp"

namespace ealgan {

inline constexpr std::size_t kNoiseDim = 128;
inline constexpr int kDefaultGeneratorDepth = 4;
// Initial bias of every ReLU layer. Inputs are min-max scaled to [0, 1], so
// with zero bias a unit whose weights all start negative never fires; at
// d = 2 that often leaves a discriminator's whole trunk dead.
inline constexpr double kReluBiasInit = 0.1;

// Conditional generator. Widths are (128, 2d, ..., 2d, d): `depth` counts the
// neuron layers including the 128-wide input, so the default depth 4 is
// 128 → 2d → 2d → d. Input is noise ⊙ label embedding; ReLU on hidden
// layers, sigmoid on the output.
class GeneratorNet {
 public:
  GeneratorNet(std::size_t data_dim, int depth, SeededRng& rng);

  std::size_t data_dim() const { return data_dim_; }
  int depth() const { return depth_; }
  const Matrix& label_embedding() const { return label_embedding_; }
  const std::vector<Affine>& layers() const { return layers_; }

  // Embedding table first, then (weight, bias) per layer.
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  // Copies values in; every shape must match the current parameters.
  void assign_parameters(std::span<const Matrix> values);

 private:
  std::size_t data_dim_;
  int depth_;
  Matrix label_embedding_;  // 2 × 128
  std::vector<Affine> layers_;
};

struct GeneratorTape {
  Matrix noise;
  Labels labels;
  Matrix embedded;                  // embedding rows per sample
  std::vector<Matrix> layer_input;  // input to each affine layer
  std::vector<Matrix> layer_output; // post-activation output of each layer
};

Matrix generator_forward(const GeneratorNet& gen, const Matrix& noise, std::span<const int> labels,
                         GeneratorTape* tape = nullptr);
// Parameter gradients in `parameters()` order given dL/d(output).
std::vector<Matrix> generator_backward(const GeneratorNet& gen, const GeneratorTape& tape,
                                       const Matrix& grad_output);

inline constexpr std::size_t kTrunkLayers = 2;

// Dual-head discriminator over a shared ReLU trunk d → 2d → 2d.
//   C(x, y) = sigmoid(w_c·h + b_c + e_y·h)   adversarial head, projection term e_y
//   φ(x)    = sigmoid(w_φ·h + b_φ)           auxiliary head, P(anomaly)
// Without projection the adversarial head is the plain affine w_c·h + b_c.
class DiscriminatorNet {
 public:
  DiscriminatorNet(std::size_t data_dim, double learning_rate, bool projection, SeededRng& rng);

  std::size_t data_dim() const { return data_dim_; }
  std::size_t hidden_dim() const { return 2 * data_dim_; }
  double learning_rate() const { return learning_rate_; }
  bool has_projection() const { return projection_; }

  const std::vector<Affine>& trunk() const { return trunk_; }
  const Affine& adversarial_head() const { return adversarial_; }
  const Matrix& projection_embedding() const { return embedding_; }
  const Affine& auxiliary_head() const { return auxiliary_; }

  // (W, b) per trunk layer, adversarial W, b, [projection embedding], auxiliary W, b.
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  void assign_parameters(std::span<const Matrix> values);

 private:
  std::size_t data_dim_;
  double learning_rate_;
  bool projection_;
  std::vector<Affine> trunk_;
  Affine adversarial_;
  Matrix embedding_;  // 2 × 2d, empty without projection
  Affine auxiliary_;
};

struct DiscriminatorOutput {
  std::vector<double> adversarial;  // C: probability of "real"
  std::vector<double> auxiliary;    // φ: probability of "anomaly"
};

struct DiscriminatorTape {
  Matrix input;
  std::vector<Matrix> trunk_output;  // post-ReLU, one per trunk layer
  Labels labels;
  DiscriminatorOutput output;

  const Matrix& hidden() const { return trunk_output.back(); }
};

DiscriminatorOutput discriminator_forward(const DiscriminatorNet& disc, const Matrix& x,
                                          std::span<const int> labels,
                                          DiscriminatorTape* tape = nullptr);
// φ only; needs no labels.
std::vector<double> discriminator_phi(const DiscriminatorNet& disc, const Matrix& x);

struct DiscriminatorGrad {
  std::vector<Matrix> params;  // `parameters()` order
  Matrix input;                // dL/dx, empty unless requested
};

// Gradients given dL/dC and dL/dφ per sample. Either span may be empty,
// meaning that head receives no gradient.
DiscriminatorGrad discriminator_backward(const DiscriminatorNet& disc, const DiscriminatorTape& tape,
                                         std::span<const double> grad_adversarial,
                                         std::span<const double> grad_auxiliary,
                                         bool need_input = false);

struct EnsembleModel {
  GeneratorNet generator;
  std::vector<DiscriminatorNet> discriminators;

  std::size_t data_dim() const { return generator.data_dim(); }
  std::size_t size() const { return discriminators.size(); }
};

struct EnsembleOptions {
  int generator_depth = kDefaultGeneratorDepth;
  bool projection = true;
};

// Generator and m discriminators, each discriminator with its own learning
// rate drawn uniformly from [lr_lo, lr_hi].
EnsembleModel build_ensemble(std::size_t data_dim, std::size_t m, SeededRng& rng, double lr_lo,
                             double lr_hi, const EnsembleOptions& options = {});

void accumulate(std::vector<Matrix>& into, const std::vector<Matrix>& grads);

}  // namespace ealgan
