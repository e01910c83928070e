#include "ealgan/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ealgan {

AdamState::AdamState(std::span<const Matrix* const> params) {
  for (const Matrix* p : params) {
    first_moment.emplace_back(p->rows(), p->cols());
    second_moment.emplace_back(p->rows(), p->cols());
  }
}

void adam_update(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state,
                 double lr) {
  if (params.size() != grads.size()) {
    throw ShapeError("adam_update: " + std::to_string(params.size()) + " params but " +
                     std::to_string(grads.size()) + " gradients");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("adam_update: learning rate must be positive");
  if (state.first_moment.empty() && !params.empty()) {
    std::vector<const Matrix*> view(params.begin(), params.end());
    const auto beta1 = state.beta1, beta2 = state.beta2, eps = state.epsilon;
    state = AdamState(view);
    state.beta1 = beta1;
    state.beta2 = beta2;
    state.epsilon = eps;
  }
  if (state.first_moment.size() != params.size()) {
    throw ShapeError("adam_update: state tracks " + std::to_string(state.first_moment.size()) +
                     " params, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(*params[i], grads[i], "adam_update");
    require_same_shape(*params[i], state.first_moment[i], "adam_update (state)");
    if (!grads[i].all_finite()) {
      throw NumericError("adam_update: non-finite gradient in parameter " + std::to_string(i) +
                         " " + grads[i].shape_string() + "; update rejected");
    }
  }

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->values();
    auto g = grads[i].values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      p[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

void adam_update(Matrix& param, const Matrix& grad, AdamState& state, double lr) {
  Matrix* p[] = {&param};
  adam_update(std::span<Matrix* const>(p), std::span<const Matrix>(&grad, 1), state, lr);
}

double grad_check(const std::function<double()>& loss, std::span<Matrix* const> params,
                  std::span<const Matrix> analytic, SeededRng& rng, std::size_t min_coords,
                  double step) {
  if (params.size() != analytic.size()) throw ShapeError("grad_check: params/gradients count");
  struct Coord {
    std::size_t param;
    std::size_t index;
  };
  std::vector<Coord> coords;
  for (std::size_t p = 0; p < params.size(); ++p) {
    require_same_shape(*params[p], analytic[p], "grad_check");
    for (std::size_t i = 0; i < params[p]->size(); ++i) coords.push_back({p, i});
  }
  if (coords.size() > min_coords) {
    rng.shuffle(std::span<Coord>(coords));
    coords.resize(min_coords);
  }

  double worst = 0.0;
  for (const auto& c : coords) {
    double& x = params[c.param]->values()[c.index];
    const double saved = x;
    x = saved + step;
    const double up = loss();
    x = saved - step;
    const double down = loss();
    x = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[c.param].values()[c.index];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace ealgan
