#include "ealgan/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ealgan {

Matrix affine_forward(const Matrix& weight, const Matrix& bias, const Matrix& x) {
  if (x.cols() != weight.rows()) {
    throw ShapeError("affine_forward: input " + x.shape_string() + " vs weight " +
                     weight.shape_string());
  }
  if (bias.rows() != 1 || bias.cols() != weight.cols()) {
    throw ShapeError("affine_forward: bias " + bias.shape_string() + " vs weight " +
                     weight.shape_string());
  }
  return add_row(matmul(x, weight), bias);
}

AffineGrad affine_backward(const Affine& layer, const Matrix& x, const Matrix& grad_out,
                           bool need_input) {
  if (grad_out.rows() != x.rows() || grad_out.cols() != layer.fan_out()) {
    throw ShapeError("affine_backward: grad " + grad_out.shape_string() + " for input " +
                     x.shape_string() + " and weight " + layer.weight.shape_string());
  }
  AffineGrad g;
  g.weight = matmul_tn(x, grad_out);
  g.bias = column_sums(grad_out);
  if (need_input) g.input = matmul_nt(grad_out, layer.weight);
  return g;
}

double sigmoid(double x) {
  const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return std::clamp(s, kProbFloor, 1.0 - kProbFloor);
}

double sigmoid_derivative_from_output(double s) {
  if (s <= kProbFloor || s >= 1.0 - kProbFloor) return 0.0;
  return s * (1.0 - s);
}

Matrix activation(Activation kind, const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) {
    v = kind == Activation::relu ? std::max(0.0, v) : sigmoid(v);
  }
  return out;
}

Matrix activation_backward(Activation kind, const Matrix& output, const Matrix& grad_out) {
  require_same_shape(output, grad_out, "activation_backward");
  Matrix g = grad_out;
  auto gv = g.values();
  auto ov = output.values();
  for (std::size_t i = 0; i < gv.size(); ++i) {
    gv[i] *= kind == Activation::relu ? (ov[i] > 0.0 ? 1.0 : 0.0)
                                      : sigmoid_derivative_from_output(ov[i]);
  }
  return g;
}

void validate_labels(std::span<const int> labels, std::size_t expected, const char* what) {
  if (labels.size() != expected) {
    throw ShapeError(std::string(what) + ": " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(expected) + " samples");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) {
      throw std::invalid_argument(std::string(what) + ": label " + std::to_string(y) +
                                  " is not 0 or 1");
    }
  }
}

Matrix embedding_lookup(const Matrix& table, std::span<const int> labels) {
  Matrix out(labels.size(), table.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    if (y >= table.rows()) throw ShapeError("embedding_lookup: label out of range");
    auto src = table.row(y);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix embedding_backward(const Matrix& table, std::span<const int> labels, const Matrix& grad_rows) {
  if (grad_rows.rows() != labels.size() || grad_rows.cols() != table.cols()) {
    throw ShapeError("embedding_backward: grad " + grad_rows.shape_string() + " for table " +
                     table.shape_string());
  }
  Matrix g(table.rows(), table.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto dst = g.row(static_cast<std::size_t>(labels[i]));
    auto src = grad_rows.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
  }
  return g;
}

double init_bound(std::size_t fan_in) { return std::sqrt(6.0 / static_cast<double>(fan_in)); }

Affine init_layer(std::size_t fan_in, std::size_t fan_out, SeededRng& rng, double bias) {
  if (fan_in == 0 || fan_out == 0) throw ShapeError("init_layer: fan_in and fan_out must be >= 1");
  const double s = init_bound(fan_in);
  Affine layer{Matrix(fan_in, fan_out), Matrix(1, fan_out, bias)};
  for (double& w : layer.weight.values()) w = rng.uniform(-s, s);
  return layer;
}

Matrix init_embedding(std::size_t entries, std::size_t dim, SeededRng& rng) {
  Matrix table(entries, dim);
  for (double& v : table.values()) v = rng.uniform(-0.05, 0.05);
  return table;
}

}  // namespace ealgan
