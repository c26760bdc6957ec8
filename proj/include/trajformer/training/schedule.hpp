#pragma once

#include <cstddef>

namespace trajformer::training {

/// d_model^-0.5 * min(step^-0.5, step * warmup^-1.5). Rejects step 0 and
/// warmup 0 with std::invalid_argument.
double lr_schedule(std::size_t step, std::size_t d_model, std::size_t warmup);

}  // namespace trajformer::training
