#include "trajformer/eval/evaluate.hpp"

#include <cmath>

namespace trajformer::eval {

EvaluationResult evaluate(const Predictor& predictor, std::span<const data::Scene> scenes,
                          bool keep_forecasts) {
  EvaluationResult result;
  MetricsAccumulator acc;
  for (std::size_t k = 0; k < scenes.size(); ++k) {
    const auto& scene = scenes[k];
    auto forecast = predictor(scene);
    const auto [scene_ade, scene_fde] = acc.add(scene, forecast);
    result.scenes.push_back({k, scene.first_frame_id, scene.num_agents(), scene_ade, scene_fde});
    if (keep_forecasts) result.forecasts.push_back(std::move(forecast));
  }
  result.report = acc.report();
  return result;
}

Predictor model_predictor(const model::TrajectoryModel& model) {
  return [&model](const data::Scene& scene) {
    return model::generate_trajectory(model, scene, model::DecodeMode::Autoregressive);
  };
}

std::vector<data::FrameRecords> forecast_to_records(const data::Scene& scene,
                                                    const model::Forecast& forecast) {
  const std::size_t n = scene.num_agents();
  std::vector<data::FrameRecords> out(forecast.t_pred);
  for (std::size_t t = 0; t < forecast.t_pred; ++t) {
    out[t].frame_id = scene.first_frame_id + static_cast<long>(scene.t_obs + t);
    for (std::size_t i = 0; i < n; ++i) {
      if (!forecast.valid[t * n + i]) continue;
      data::AgentState a;
      a.agent_id = scene.agents[i].id;
      a.category = scene.agents[i].category;
      const auto p = forecast.at(t, i);
      a.x = p.x;
      a.y = p.y;
      a.length = scene.hist(scene.t_obs - 1, i, data::kLength);
      a.width = scene.hist(scene.t_obs - 1, i, data::kWidth);
      const auto prev = t == 0 ? data::to_global(scene, scene.last_observed(i)) : forecast.at(t - 1, i);
      const double dx = p.x - prev.x, dy = p.y - prev.y;
      a.heading = std::hypot(dx, dy) > 1e-9 ? std::atan2(dy, dx)
                                            : scene.hist(scene.t_obs - 1, i, data::kHeading);
      out[t].agents.push_back(a);
    }
  }
  return out;
}

}  // namespace trajformer::eval
