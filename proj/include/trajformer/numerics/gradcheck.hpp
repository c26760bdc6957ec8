#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trajformer/numerics/tensor.hpp"

namespace trajformer::nn {

struct GradCheckOptions {
  double eps = 1e-5;
  // Denominator floor for the relative error, as a fraction of max(1, |loss|).
  // Central-difference round-off grows with the loss value, so a floor tied to
  // it keeps the measure unchanged when the loss is rescaled.
  double rel_floor = 1e-6;
  // 0 checks every element; otherwise an evenly strided subset per tensor.
  std::size_t max_elements_per_tensor = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t elements_checked = 0;
  // Element with the largest relative error.
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

double relative_error(double analytic, double numeric, double floor);

/// Compares reverse-mode gradients of a scalar loss against central finite
/// differences. `loss_fn` must be deterministic.
GradCheckResult check_gradients(const std::function<Tensor()>& loss_fn,
                                std::span<Tensor> inputs, const GradCheckOptions& options = {});

}  // namespace trajformer::nn
