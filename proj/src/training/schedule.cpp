#include "trajformer/training/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace trajformer::training {

double lr_schedule(std::size_t step, std::size_t d_model, std::size_t warmup) {
  if (step == 0) throw std::invalid_argument("lr_schedule: steps are counted from 1");
  if (warmup == 0) throw std::invalid_argument("lr_schedule: warmup must be at least 1");
  if (d_model == 0) throw std::invalid_argument("lr_schedule: d_model must be positive");
  const double s = static_cast<double>(step);
  const double d = static_cast<double>(d_model);
  const double w = static_cast<double>(warmup);
  // One rounding per branch so the peak lands on (d * warmup)^-0.5 exactly
  // whenever that value is representable.
  if (step <= warmup) return s / std::sqrt(d * w * w * w);
  return 1.0 / std::sqrt(d * s);
}

}  // namespace trajformer::training
