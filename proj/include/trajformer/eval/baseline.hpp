#pragma once

#include "trajformer/data/scene.hpp"
#include "trajformer/model/network.hpp"

namespace trajformer::eval {

/// Constant-velocity extrapolation: the mean displacement over consecutive
/// observed frame pairs, applied from the last observed position. Agents with
/// no such pair stay where they are.
model::Forecast cv_baseline(const data::Scene& scene);

/// Returns the ground-truth future as a forecast (test oracle).
model::Forecast ground_truth_forecast(const data::Scene& scene);

}  // namespace trajformer::eval
