#include "ealgan/networks.hpp"

#include <stdexcept>
#include <string>

namespace ealgan {

namespace {

void assign_checked(std::vector<Matrix*> targets, std::span<const Matrix> values, const char* what) {
  if (targets.size() != values.size()) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(targets.size()) +
                     " parameter matrices, got " + std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!targets[i]->same_shape(values[i])) {
      throw ShapeError(std::string(what) + ": parameter " + std::to_string(i) + " has shape " +
                       values[i].shape_string() + ", expected " + targets[i]->shape_string());
    }
  }
  for (std::size_t i = 0; i < targets.size(); ++i) *targets[i] = values[i];
}

std::vector<const Matrix*> to_const_view(const std::vector<Matrix*>& v) {
  return {v.begin(), v.end()};
}

// Shifts each unit's bias so its hyperplane passes through the centre of the
// [0,1]^d input cube; otherwise a unit with all-negative weights starts dead.
void center_on_unit_cube(Affine& layer) {
  for (std::size_t j = 0; j < layer.weight.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < layer.weight.rows(); ++i) s += layer.weight(i, j);
    layer.bias(0, j) -= 0.5 * s;
  }
}

}  // namespace

// Generator ---------------------------------------------------------------

GeneratorNet::GeneratorNet(std::size_t data_dim, int depth, SeededRng& rng)
    : data_dim_(data_dim), depth_(depth) {
  if (data_dim == 0) throw ShapeError("GeneratorNet: data dimension must be >= 1");
  if (depth < 3 || depth > 5) throw std::invalid_argument("GeneratorNet: depth must be in [3, 5]");
  label_embedding_ = init_embedding(2, kNoiseDim, rng);
  std::size_t fan_in = kNoiseDim;
  for (int l = 0; l < depth - 1; ++l) {
    const std::size_t fan_out = l == depth - 2 ? data_dim : 2 * data_dim;
    const bool hidden = l + 2 < depth;
    layers_.push_back(init_layer(fan_in, fan_out, rng, hidden ? kReluBiasInit : 0.0));
    fan_in = fan_out;
  }
}

std::vector<Matrix*> GeneratorNet::parameters() {
  std::vector<Matrix*> p{&label_embedding_};
  for (auto& l : layers_) {
    p.push_back(&l.weight);
    p.push_back(&l.bias);
  }
  return p;
}

std::vector<const Matrix*> GeneratorNet::parameters() const {
  return to_const_view(const_cast<GeneratorNet*>(this)->parameters());
}

void GeneratorNet::assign_parameters(std::span<const Matrix> values) {
  assign_checked(parameters(), values, "GeneratorNet::assign_parameters");
}

Matrix generator_forward(const GeneratorNet& gen, const Matrix& noise, std::span<const int> labels,
                         GeneratorTape* tape) {
  if (noise.cols() != kNoiseDim) {
    throw ShapeError("generator_forward: noise " + noise.shape_string() + ", expected 128 columns");
  }
  validate_labels(labels, noise.rows(), "generator_forward");
  Matrix embedded = embedding_lookup(gen.label_embedding(), labels);
  Matrix a = hadamard(noise, embedded);
  const auto& layers = gen.layers();
  if (tape) {
    tape->noise = noise;
    tape->labels.assign(labels.begin(), labels.end());
    tape->embedded = std::move(embedded);
    tape->layer_input.clear();
    tape->layer_output.clear();
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto kind = l + 1 == layers.size() ? Activation::sigmoid : Activation::relu;
    Matrix out = activation(kind, affine_forward(layers[l], a));
    if (tape) tape->layer_input.push_back(std::move(a));
    a = std::move(out);
    if (tape) tape->layer_output.push_back(a);
  }
  return a;
}

std::vector<Matrix> generator_backward(const GeneratorNet& gen, const GeneratorTape& tape,
                                       const Matrix& grad_output) {
  const auto& layers = gen.layers();
  if (tape.layer_output.size() != layers.size()) {
    throw ShapeError("generator_backward: tape does not match the network");
  }
  require_same_shape(tape.layer_output.back(), grad_output, "generator_backward");
  std::vector<Matrix> grads(1 + 2 * layers.size());
  Matrix g = grad_output;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto kind = l + 1 == layers.size() ? Activation::sigmoid : Activation::relu;
    Matrix pre = activation_backward(kind, tape.layer_output[l], g);
    AffineGrad ag = affine_backward(layers[l], tape.layer_input[l], pre);
    grads[1 + 2 * l] = std::move(ag.weight);
    grads[2 + 2 * l] = std::move(ag.bias);
    g = std::move(ag.input);
  }
  // d(noise ⊙ e_y)/d e_y = noise
  grads[0] = embedding_backward(gen.label_embedding(), tape.labels, hadamard(g, tape.noise));
  return grads;
}

// Discriminator -----------------------------------------------------------

DiscriminatorNet::DiscriminatorNet(std::size_t data_dim, double learning_rate, bool projection,
                                   SeededRng& rng)
    : data_dim_(data_dim), learning_rate_(learning_rate), projection_(projection) {
  if (data_dim == 0) throw ShapeError("DiscriminatorNet: data dimension must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("DiscriminatorNet: learning rate must be > 0");
  const std::size_t hidden = 2 * data_dim;
  trunk_.push_back(init_layer(data_dim, hidden, rng, kReluBiasInit));
  center_on_unit_cube(trunk_.front());
  for (std::size_t l = 1; l < kTrunkLayers; ++l) {
    trunk_.push_back(init_layer(hidden, hidden, rng, kReluBiasInit));
  }
  adversarial_ = init_layer(hidden, 1, rng);
  if (projection_) embedding_ = init_embedding(2, hidden, rng);
  auxiliary_ = init_layer(hidden, 1, rng);
}

std::vector<Matrix*> DiscriminatorNet::parameters() {
  std::vector<Matrix*> p;
  for (auto& l : trunk_) {
    p.push_back(&l.weight);
    p.push_back(&l.bias);
  }
  p.push_back(&adversarial_.weight);
  p.push_back(&adversarial_.bias);
  if (projection_) p.push_back(&embedding_);
  p.push_back(&auxiliary_.weight);
  p.push_back(&auxiliary_.bias);
  return p;
}

std::vector<const Matrix*> DiscriminatorNet::parameters() const {
  return to_const_view(const_cast<DiscriminatorNet*>(this)->parameters());
}

void DiscriminatorNet::assign_parameters(std::span<const Matrix> values) {
  assign_checked(parameters(), values, "DiscriminatorNet::assign_parameters");
}

namespace {

// Post-ReLU output of every trunk layer; the last one feeds both heads.
std::vector<Matrix> trunk_forward(const DiscriminatorNet& disc, const Matrix& x) {
  if (x.cols() != disc.data_dim()) {
    throw ShapeError("discriminator: input " + x.shape_string() + " for data dimension " +
                     std::to_string(disc.data_dim()));
  }
  std::vector<Matrix> outs;
  const Matrix* a = &x;
  for (const auto& layer : disc.trunk()) {
    outs.push_back(activation(Activation::relu, affine_forward(layer, *a)));
    a = &outs.back();
  }
  return outs;
}

std::vector<double> head(const Affine& layer, const Matrix& h) {
  Matrix logits = affine_forward(layer, h);
  std::vector<double> out(h.rows());
  for (std::size_t i = 0; i < h.rows(); ++i) out[i] = logits(i, 0);
  return out;
}

}  // namespace

DiscriminatorOutput discriminator_forward(const DiscriminatorNet& disc, const Matrix& x,
                                          std::span<const int> labels, DiscriminatorTape* tape) {
  validate_labels(labels, x.rows(), "discriminator_forward");
  std::vector<Matrix> trunk_out = trunk_forward(disc, x);
  const Matrix& h = trunk_out.back();
  DiscriminatorOutput out;
  out.adversarial = head(disc.adversarial_head(), h);
  out.auxiliary = head(disc.auxiliary_head(), h);
  const Matrix& emb = disc.projection_embedding();
  for (std::size_t i = 0; i < h.rows(); ++i) {
    if (disc.has_projection()) {
      auto e = emb.row(static_cast<std::size_t>(labels[i]));
      auto hi = h.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < hi.size(); ++j) dot += e[j] * hi[j];
      out.adversarial[i] += dot;
    }
    out.adversarial[i] = sigmoid(out.adversarial[i]);
    out.auxiliary[i] = sigmoid(out.auxiliary[i]);
  }
  if (tape) {
    tape->input = x;
    tape->trunk_output = std::move(trunk_out);
    tape->labels.assign(labels.begin(), labels.end());
    tape->output = out;
  }
  return out;
}

std::vector<double> discriminator_phi(const DiscriminatorNet& disc, const Matrix& x) {
  std::vector<double> phi = head(disc.auxiliary_head(), trunk_forward(disc, x).back());
  for (double& p : phi) p = sigmoid(p);
  return phi;
}

DiscriminatorGrad discriminator_backward(const DiscriminatorNet& disc, const DiscriminatorTape& tape,
                                         std::span<const double> grad_adversarial,
                                         std::span<const double> grad_auxiliary, bool need_input) {
  const Matrix& hidden_out = tape.hidden();
  const std::size_t n = hidden_out.rows();
  if ((!grad_adversarial.empty() && grad_adversarial.size() != n) ||
      (!grad_auxiliary.empty() && grad_auxiliary.size() != n)) {
    throw ShapeError("discriminator_backward: gradient length does not match batch of " +
                     std::to_string(n));
  }
  const std::size_t hidden = disc.hidden_dim();
  Matrix d_adv_logit(n, 1), d_aux_logit(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!grad_adversarial.empty()) {
      d_adv_logit(i, 0) =
          grad_adversarial[i] * sigmoid_derivative_from_output(tape.output.adversarial[i]);
    }
    if (!grad_auxiliary.empty()) {
      d_aux_logit(i, 0) = grad_auxiliary[i] * sigmoid_derivative_from_output(tape.output.auxiliary[i]);
    }
  }

  AffineGrad adv = affine_backward(disc.adversarial_head(), hidden_out, d_adv_logit);
  AffineGrad aux = affine_backward(disc.auxiliary_head(), hidden_out, d_aux_logit);
  Matrix d_hidden = adv.input;
  d_hidden += aux.input;

  Matrix d_emb;
  if (disc.has_projection()) {
    d_emb = Matrix(2, hidden);
    const Matrix& emb = disc.projection_embedding();
    for (std::size_t i = 0; i < n; ++i) {
      const auto y = static_cast<std::size_t>(tape.labels[i]);
      const double g = d_adv_logit(i, 0);
      if (g == 0.0) continue;
      auto h = hidden_out.row(i);
      auto e = emb.row(y);
      auto de = d_emb.row(y);
      auto dh = d_hidden.row(i);
      for (std::size_t j = 0; j < hidden; ++j) {
        de[j] += g * h[j];
        dh[j] += g * e[j];
      }
    }
  }

  const auto& trunk = disc.trunk();
  std::vector<Matrix> trunk_grads(2 * trunk.size());
  Matrix d_out = std::move(d_hidden);
  for (std::size_t l = trunk.size(); l-- > 0;) {
    Matrix d_pre = activation_backward(Activation::relu, tape.trunk_output[l], d_out);
    const Matrix& in = l == 0 ? tape.input : tape.trunk_output[l - 1];
    AffineGrad g = affine_backward(trunk[l], in, d_pre, l > 0 || need_input);
    trunk_grads[2 * l] = std::move(g.weight);
    trunk_grads[2 * l + 1] = std::move(g.bias);
    d_out = std::move(g.input);
  }

  DiscriminatorGrad out;
  for (auto& g : trunk_grads) out.params.push_back(std::move(g));
  out.params.push_back(std::move(adv.weight));
  out.params.push_back(std::move(adv.bias));
  if (disc.has_projection()) out.params.push_back(std::move(d_emb));
  out.params.push_back(std::move(aux.weight));
  out.params.push_back(std::move(aux.bias));
  if (need_input) out.input = std::move(d_out);
  return out;
}

// Ensemble ----------------------------------------------------------------

EnsembleModel build_ensemble(std::size_t data_dim, std::size_t m, SeededRng& rng, double lr_lo,
                             double lr_hi, const EnsembleOptions& options) {
  if (m == 0) throw std::invalid_argument("build_ensemble: need at least one discriminator");
  if (!(lr_lo > 0.0 && lr_lo <= lr_hi)) {
    throw std::invalid_argument("build_ensemble: learning-rate range must satisfy 0 < lo <= hi");
  }
  SeededRng gen_rng = rng.fork();
  EnsembleModel model{GeneratorNet(data_dim, options.generator_depth, gen_rng), {}};
  model.discriminators.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lr = rng.uniform(lr_lo, lr_hi);
    SeededRng disc_rng = rng.fork();
    model.discriminators.emplace_back(data_dim, lr, options.projection, disc_rng);
  }
  return model;
}

void accumulate(std::vector<Matrix>& into, const std::vector<Matrix>& grads) {
  if (into.empty()) {
    into = grads;
    return;
  }
  if (into.size() != grads.size()) throw ShapeError("accumulate: gradient lists differ in length");
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += grads[i];
}

}  // namespace ealgan
