#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "trajformer/data/scene.hpp"
#include "trajformer/model/network.hpp"

namespace trajformer::eval {

// Category weights of the weighted displacement sums.
inline constexpr double kVehicleWeight = 0.20;
inline constexpr double kPedestrianWeight = 0.58;
inline constexpr double kCyclistWeight = 0.22;

/// Positions [steps][agents][2] with a per-point validity mask.
struct PointSeries {
  std::size_t steps = 0;
  std::size_t agents = 0;
  std::span<const double> xy;
  std::span<const std::uint8_t> valid;
};

/// Mean Euclidean error over every valid point. Throws if none is valid.
double ade(const PointSeries& pred, const PointSeries& gt);
/// Mean Euclidean error at the final step over agents valid there.
double fde(const PointSeries& pred, const PointSeries& gt);

enum class MetricGroup { Vehicle, Pedestrian, Cyclist, Other };
MetricGroup metric_group(data::Category c);

struct WeightedSum {
  double value = 0.0;
  bool partial = false;  // some weighted category had no samples
};

/// 0.20 * vehicle + 0.58 * pedestrian + 0.22 * cyclist over the categories
/// that are present.
WeightedSum weighted_metrics(std::optional<double> vehicle, std::optional<double> pedestrian,
                             std::optional<double> cyclist);

struct CategoryMetrics {
  double ade = 0.0;
  double fde = 0.0;
  std::size_t points = 0;  // valid agent-frames
  std::size_t finals = 0;  // agents with a valid final frame
  bool present() const { return points > 0; }
};

struct MetricsReport {
  CategoryMetrics vehicle, pedestrian, cyclist, other;
  CategoryMetrics overall;  // every category pooled, "other" included
  double wsade = 0.0;
  double wsfde = 0.0;
  bool partial = false;
  std::size_t scenes = 0;
};

/// Pools point errors per category across scenes.
class MetricsAccumulator {
 public:
  /// `scene` carries ground truth in global coordinates (origin applied).
  /// Returns (ADE, FDE) of this scene over all its agents.
  std::pair<double, double> add(const data::Scene& scene, const model::Forecast& forecast);
  MetricsReport report() const;

 private:
  struct Sums {
    double dist = 0.0, final_dist = 0.0;
    std::size_t points = 0, finals = 0;
  };
  Sums sums_[4];
  std::size_t scenes_ = 0;
};

}  // namespace trajformer::eval
