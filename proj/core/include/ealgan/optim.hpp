#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ealgan/matrix.hpp"
#include "ealgan/rng.hpp"

namespace ealgan {

// Adam with bias correction. Moments are kept per parameter matrix; the step
// counter is shared and advances once per update call.
struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(std::span<const Matrix* const> params);
};

// Updates every (param, grad) pair in place. Rejects the whole update, leaving
// params and state untouched, if any gradient is non-finite.
void adam_update(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state,
                 double lr);
// Single-matrix convenience overload.
void adam_update(Matrix& param, const Matrix& grad, AdamState& state, double lr);

// Central finite differences on a random subset of coordinates (at least
// `min_coords`, or all of them if fewer exist). `loss` must read the current
// values of `params`; coordinates are perturbed in place and restored.
// Returns the max of |a - n| / max(|a|, |n|, 1e-8).
double grad_check(const std::function<double()>& loss, std::span<Matrix* const> params,
                  std::span<const Matrix> analytic, SeededRng& rng, std::size_t min_coords = 50,
                  double step = 1e-5);

}  // namespace ealgan
