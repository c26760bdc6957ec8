#include "trajformer/eval/baseline.hpp"

#include <stdexcept>

namespace trajformer::eval {

model::Forecast cv_baseline(const data::Scene& scene) {
  const std::size_t n = scene.num_agents();
  model::Forecast out(scene.t_pred, n);
  for (std::size_t i = 0; i < n; ++i) {
    double vx = 0.0, vy = 0.0;
    std::size_t pairs = 0;
    for (std::size_t t = 1; t < scene.t_obs; ++t) {
      if (!scene.present(t, i) || !scene.present(t - 1, i)) continue;
      const auto a = scene.position(t - 1, i);
      const auto b = scene.position(t, i);
      vx += b.x - a.x;
      vy += b.y - a.y;
      ++pairs;
    }
    if (pairs > 0) {
      vx /= static_cast<double>(pairs);
      vy /= static_cast<double>(pairs);
    }
    const auto last = data::to_global(scene, scene.last_observed(i));
    for (std::size_t t = 0; t < scene.t_pred; ++t) {
      const double steps = static_cast<double>(t + 1);
      out.set(t, i, {last.x + vx * steps, last.y + vy * steps});
    }
  }
  return out;
}

model::Forecast ground_truth_forecast(const data::Scene& scene) {
  if (!scene.has_future) throw std::invalid_argument("scene has no ground truth");
  const std::size_t n = scene.num_agents();
  model::Forecast out(scene.t_pred, n);
  for (std::size_t t = 0; t < scene.t_pred; ++t)
    for (std::size_t i = 0; i < n; ++i) {
      out.set(t, i, data::to_global(scene, scene.position(scene.t_obs + t, i)));
      out.valid[t * n + i] = scene.present(scene.t_obs + t, i);
    }
  return out;
}

}  // namespace trajformer::eval
