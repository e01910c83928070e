#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ealgan/matrix.hpp"
#include "ealgan/rng.hpp"

namespace ealgan {

// Sigmoid outputs are clamped into [kProbFloor, 1 - kProbFloor] so that every
// log-loss argument stays finite.
inline constexpr double kProbFloor = 1e-7;

enum class Activation { relu, sigmoid };

// Fully connected layer: y = x·W + b, W is (in×out), b is (1×out).
struct Affine {
  Matrix weight;
  Matrix bias;

  std::size_t fan_in() const { return weight.rows(); }
  std::size_t fan_out() const { return weight.cols(); }
};

struct AffineGrad {
  Matrix weight;
  Matrix bias;
  Matrix input;  // dL/dX
};

Matrix affine_forward(const Matrix& weight, const Matrix& bias, const Matrix& x);
inline Matrix affine_forward(const Affine& layer, const Matrix& x) {
  return affine_forward(layer.weight, layer.bias, x);
}
// Gradients of y = x·W + b given dL/dy. `need_input` skips dL/dx when false.
AffineGrad affine_backward(const Affine& layer, const Matrix& x, const Matrix& grad_out,
                           bool need_input = true);

Matrix activation(Activation kind, const Matrix& x);
double sigmoid(double x);
// dL/d(pre-activation) given the activation output and dL/d(output). For
// sigmoid the derivative is zero inside the clamped region.
Matrix activation_backward(Activation kind, const Matrix& output, const Matrix& grad_out);
double sigmoid_derivative_from_output(double s);

// Rows of `table` selected by label, one per sample.
Matrix embedding_lookup(const Matrix& table, std::span<const int> labels);
// Scatter-add of per-sample gradients into a table-shaped gradient.
Matrix embedding_backward(const Matrix& table, std::span<const int> labels, const Matrix& grad_rows);

// He-style uniform init: W ~ U[-s, s], s = sqrt(6 / fan_in); every bias
// entry set to `bias` (0 by default).
Affine init_layer(std::size_t fan_in, std::size_t fan_out, SeededRng& rng, double bias = 0.0);
double init_bound(std::size_t fan_in);
// Embedding tables are uniform in [-0.05, 0.05].
Matrix init_embedding(std::size_t entries, std::size_t dim, SeededRng& rng);

void validate_labels(std::span<const int> labels, std::size_t expected, const char* what);

}  // namespace ealgan
