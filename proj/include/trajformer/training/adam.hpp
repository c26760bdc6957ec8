#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajformer/model/params.hpp"

namespace trajformer::training {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::size_t step = 0;

  explicit AdamState(std::span<const model::NamedTensor> params);
};

class NonFiniteGradient : public std::runtime_error {
 public:
  NonFiniteGradient(const std::string& parameter, std::size_t index);
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

/// One bias-corrected Adam update of every parameter in place. Parameters
/// without an accumulated gradient count as zero gradient. All gradients are
/// checked before anything is modified.
void adam_step(std::span<model::NamedTensor> params, AdamState& state, double lr,
               const AdamOptions& options = {});

/// Rescales gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(std::span<model::NamedTensor> params, double max_norm);

}  // namespace trajformer::training
