#include "trajformer/training/loss.hpp"

#include <stdexcept>
#include <vector>

namespace trajformer::training {

nn::Tensor l2_loss(const nn::Tensor& pred, const nn::Tensor& gt,
                   std::span<const std::uint8_t> valid) {
  if (pred.shape() != gt.shape() || pred.rank() != 3 || pred.dim(2) != 2) {
    throw nn::DimensionError("l2_loss: pred " + nn::shape_to_string(pred.shape()) + " vs gt " +
                             nn::shape_to_string(gt.shape()));
  }
  const std::size_t steps = pred.dim(0), agents = pred.dim(1);
  if (valid.size() != steps * agents) throw nn::DimensionError("l2_loss: mask size mismatch");

  std::vector<std::uint8_t> keep(steps * agents * 2);
  std::vector<std::uint8_t> agent_seen(agents, 0);
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t n = 0; n < agents; ++n) {
      const auto v = valid[t * agents + n];
      keep[(t * agents + n) * 2] = keep[(t * agents + n) * 2 + 1] = v;
      if (v) agent_seen[n] = 1;
    }
  std::size_t counted = 0;
  for (auto s : agent_seen) counted += s;
  if (counted == 0) throw std::invalid_argument("l2_loss: no valid future slots");

  const auto diff = nn::apply_mask(nn::sub(pred, gt), keep);
  return nn::scale(nn::sum(nn::mul(diff, diff)), 1.0 / static_cast<double>(counted));
}

}  // namespace trajformer::training
