#include "trajformer/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace trajformer::nn {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult check_gradients(const std::function<Tensor()>& loss_fn,
                                std::span<Tensor> inputs, const GradCheckOptions& options) {
  for (auto& t : inputs) t.zero_grad();
  auto loss = loss_fn();
  const double floor = options.rel_floor * std::max(1.0, std::abs(loss.item()));
  loss.backward();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (auto& t : inputs) analytic.emplace_back(t.grad().begin(), t.grad().end());

  GradCheckResult result;
  NoGradGuard no_grad;
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    auto values = inputs[p].mutable_data();
    const std::size_t n = values.size();
    std::size_t stride = 1;
    if (options.max_elements_per_tensor > 0 && n > options.max_elements_per_tensor)
      stride = (n + options.max_elements_per_tensor - 1) / options.max_elements_per_tensor;
    for (std::size_t i = 0; i < n; i += stride) {
      const double original = values[i];
      values[i] = original + options.eps;
      const double plus = loss_fn().item();
      values[i] = original - options.eps;
      const double minus = loss_fn().item();
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      result.max_abs_error = std::max(result.max_abs_error, std::abs(analytic[p][i] - numeric));
      const double rel = relative_error(analytic[p][i], numeric, floor);
      if (rel > result.max_rel_error || result.elements_checked == 0) {
        result.max_rel_error = rel;
        result.worst_analytic = analytic[p][i];
        result.worst_numeric = numeric;
      }
      ++result.elements_checked;
    }
  }
  return result;
}

}  // namespace trajformer::nn
