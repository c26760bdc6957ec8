#pragma once

#include <cstdint>
#include <span>

#include "trajformer/numerics/ops.hpp"

namespace trajformer::training {

/// Squared Euclidean error summed over valid future slots, divided by the
/// number of agents with at least one valid slot. pred, gt: [T, N, 2];
/// valid: [T, N]. Throws std::invalid_argument when nothing is valid.
nn::Tensor l2_loss(const nn::Tensor& pred, const nn::Tensor& gt,
                   std::span<const std::uint8_t> valid);

}  // namespace trajformer::training
