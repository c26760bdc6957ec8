#include "trajformer/training/adam.hpp"

#include <cmath>

namespace trajformer::training {

AdamState::AdamState(std::span<const model::NamedTensor> params) {
  for (const auto& p : params) {
    m.emplace_back(p.tensor.numel(), 0.0);
    v.emplace_back(p.tensor.numel(), 0.0);
  }
}

NonFiniteGradient::NonFiniteGradient(const std::string& parameter, std::size_t index)
    : std::runtime_error("non-finite gradient in parameter '" + parameter + "' at element " +
                         std::to_string(index)),
      parameter_(parameter) {}

void adam_step(std::span<model::NamedTensor> params, AdamState& state, double lr,
               const AdamOptions& options) {
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: optimizer state built for a different parameter list");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& t = params[k].tensor;
    if (state.m[k].size() != t.numel()) {
      throw std::invalid_argument("adam_step: moment shape mismatch for '" + params[k].name + "'");
    }
    if (!t.has_grad()) continue;
    const auto g = t.grad();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!std::isfinite(g[i])) throw NonFiniteGradient(params[k].name, i);
  }

  ++state.step;
  const double step = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(options.beta1, step);
  const double c2 = 1.0 - std::pow(options.beta2, step);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& t = params[k].tensor;
    auto& m = state.m[k];
    auto& v = state.v[k];
    const bool has = t.has_grad();
    const auto g = has ? t.grad() : std::span<const double>();
    auto w = t.mutable_data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = has ? g[i] : 0.0;
      m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * gi;
      v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * gi * gi;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

double clip_grad_norm(std::span<model::NamedTensor> params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params)
    if (p.tensor.has_grad())
      for (double g : p.tensor.grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto& p : params)
      if (p.tensor.has_grad())
        for (double& g : p.tensor.mutable_grad()) g *= factor;
  }
  return norm;
}

}  // namespace trajformer::training
