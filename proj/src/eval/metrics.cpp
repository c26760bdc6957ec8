#include "trajformer/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace trajformer::eval {

namespace {

void check_aligned(const PointSeries& pred, const PointSeries& gt) {
  if (pred.steps != gt.steps || pred.agents != gt.agents ||
      pred.xy.size() != pred.steps * pred.agents * 2 || gt.xy.size() != pred.xy.size() ||
      gt.valid.size() != gt.steps * gt.agents) {
    throw std::invalid_argument("prediction and ground truth are not aligned");
  }
}

double point_error(const PointSeries& pred, const PointSeries& gt, std::size_t idx) {
  return std::hypot(pred.xy[idx * 2] - gt.xy[idx * 2], pred.xy[idx * 2 + 1] - gt.xy[idx * 2 + 1]);
}

bool point_valid(const PointSeries& pred, const PointSeries& gt, std::size_t idx) {
  return gt.valid[idx] && (pred.valid.empty() || pred.valid[idx]);
}

}  // namespace

double ade(const PointSeries& pred, const PointSeries& gt) {
  check_aligned(pred, gt);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < gt.steps * gt.agents; ++i) {
    if (!point_valid(pred, gt, i)) continue;
    total += point_error(pred, gt, i);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("ade: no valid points");
  return total / static_cast<double>(count);
}

double fde(const PointSeries& pred, const PointSeries& gt) {
  check_aligned(pred, gt);
  if (gt.steps == 0) throw std::invalid_argument("fde: empty horizon");
  double total = 0.0;
  std::size_t count = 0;
  const std::size_t base = (gt.steps - 1) * gt.agents;
  for (std::size_t n = 0; n < gt.agents; ++n) {
    if (!point_valid(pred, gt, base + n)) continue;
    total += point_error(pred, gt, base + n);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("fde: no agent valid at the final step");
  return total / static_cast<double>(count);
}

MetricGroup metric_group(data::Category c) {
  switch (c) {
    case data::Category::SmallVehicle:
    case data::Category::BigVehicle: return MetricGroup::Vehicle;
    case data::Category::Pedestrian: return MetricGroup::Pedestrian;
    case data::Category::Cyclist: return MetricGroup::Cyclist;
    case data::Category::Other: return MetricGroup::Other;
  }
  return MetricGroup::Other;
}

WeightedSum weighted_metrics(std::optional<double> vehicle, std::optional<double> pedestrian,
                             std::optional<double> cyclist) {
  WeightedSum out;
  const std::pair<std::optional<double>, double> terms[] = {
      {vehicle, kVehicleWeight}, {pedestrian, kPedestrianWeight}, {cyclist, kCyclistWeight}};
  for (const auto& [value, weight] : terms) {
    if (value) out.value += weight * *value;
    else out.partial = true;
  }
  return out;
}

std::pair<double, double> MetricsAccumulator::add(const data::Scene& scene,
                                                  const model::Forecast& forecast) {
  const std::size_t n = scene.num_agents();
  if (!scene.has_future) throw std::invalid_argument("evaluation needs ground-truth futures");
  if (forecast.num_agents != n || forecast.t_pred != scene.t_pred) {
    throw std::invalid_argument("forecast shape does not match the scene");
  }
  double scene_dist = 0.0, scene_final = 0.0;
  std::size_t scene_points = 0, scene_finals = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& sums = sums_[static_cast<int>(metric_group(scene.agents[i].category))];
    for (std::size_t t = 0; t < scene.t_pred; ++t) {
      if (!scene.present(scene.t_obs + t, i) || !forecast.valid[t * n + i]) continue;
      const auto gt = data::to_global(scene, scene.position(scene.t_obs + t, i));
      const auto p = forecast.at(t, i);
      const double d = std::hypot(p.x - gt.x, p.y - gt.y);
      sums.dist += d;
      ++sums.points;
      scene_dist += d;
      ++scene_points;
      if (t + 1 == scene.t_pred) {
        sums.final_dist += d;
        ++sums.finals;
        scene_final += d;
        ++scene_finals;
      }
    }
  }
  ++scenes_;
  const double nan = std::nan("");
  return {scene_points ? scene_dist / static_cast<double>(scene_points) : nan,
          scene_finals ? scene_final / static_cast<double>(scene_finals) : nan};
}

MetricsReport MetricsAccumulator::report() const {
  MetricsReport r;
  r.scenes = scenes_;
  CategoryMetrics* slots[] = {&r.vehicle, &r.pedestrian, &r.cyclist, &r.other};
  for (int g = 0; g < 4; ++g) {
    const auto& s = sums_[g];
    auto& m = *slots[g];
    m.points = s.points;
    m.finals = s.finals;
    m.ade = s.points ? s.dist / static_cast<double>(s.points) : 0.0;
    m.fde = s.finals ? s.final_dist / static_cast<double>(s.finals) : 0.0;
  }
  Sums pooled;
  for (const auto& s : sums_) {
    pooled.dist += s.dist;
    pooled.final_dist += s.final_dist;
    pooled.points += s.points;
    pooled.finals += s.finals;
  }
  r.overall.points = pooled.points;
  r.overall.finals = pooled.finals;
  r.overall.ade = pooled.points ? pooled.dist / static_cast<double>(pooled.points) : 0.0;
  r.overall.fde = pooled.finals ? pooled.final_dist / static_cast<double>(pooled.finals) : 0.0;
  auto opt = [](const CategoryMetrics& m, double v) {
    return m.present() ? std::optional<double>(v) : std::nullopt;
  };
  const auto ws_ade = weighted_metrics(opt(r.vehicle, r.vehicle.ade),
                                       opt(r.pedestrian, r.pedestrian.ade),
                                       opt(r.cyclist, r.cyclist.ade));
  const auto ws_fde = weighted_metrics(opt(r.vehicle, r.vehicle.fde),
                                       opt(r.pedestrian, r.pedestrian.fde),
                                       opt(r.cyclist, r.cyclist.fde));
  r.wsade = ws_ade.value;
  r.wsfde = ws_fde.value;
  r.partial = ws_ade.partial;
  return r;
}

}  // namespace trajformer::eval
