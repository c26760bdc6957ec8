#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trajformer/data/trajectory_io.hpp"
#include "trajformer/numerics/ops.hpp"

namespace trajformer::data {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

// Per-frame history features, in storage order.
enum HistoryField : std::size_t { kX = 0, kY, kLength, kWidth, kHeading, kCategory, kHistoryFields };

struct SceneAgent {
  long id = 0;
  Category category = Category::Other;
};

/// One observation/prediction window. History is [t_obs][N][6] with fields
/// (x, y, length, width, heading, category); future is [t_pred][N][2]; the
/// presence mask covers all t_obs + t_pred frames.
struct Scene {
  std::size_t t_obs = 6;
  std::size_t t_pred = 6;
  double frame_interval = 0.5;
  long first_frame_id = 0;
  std::vector<SceneAgent> agents;
  std::vector<double> history;
  std::vector<double> future;
  std::vector<std::uint8_t> presence;
  // Translation already subtracted from every coordinate.
  Point2 origin;
  bool has_future = true;

  Scene() = default;
  Scene(std::size_t obs, std::size_t pred, std::vector<SceneAgent> agent_list);

  std::size_t num_agents() const { return agents.size(); }
  std::size_t total_frames() const { return t_obs + t_pred; }

  double& hist(std::size_t t, std::size_t n, std::size_t field) {
    return history[(t * agents.size() + n) * kHistoryFields + field];
  }
  double hist(std::size_t t, std::size_t n, std::size_t field) const {
    return history[(t * agents.size() + n) * kHistoryFields + field];
  }
  double& fut(std::size_t t, std::size_t n, std::size_t c) {
    return future[(t * agents.size() + n) * 2 + c];
  }
  double fut(std::size_t t, std::size_t n, std::size_t c) const {
    return future[(t * agents.size() + n) * 2 + c];
  }
  bool present(std::size_t t, std::size_t n) const { return presence[t * agents.size() + n] != 0; }
  void set_present(std::size_t t, std::size_t n, bool v) {
    presence[t * agents.size() + n] = v ? 1 : 0;
  }

  /// Position at absolute frame index t (history or future).
  Point2 position(std::size_t t, std::size_t n) const;
  Point2 last_observed(std::size_t n) const { return position(t_obs - 1, n); }

  /// Throws std::invalid_argument when sizes or agent presence are inconsistent.
  void validate() const;
};

struct WindowOptions {
  std::size_t t_obs = 6;
  std::size_t t_total = 12;
  std::size_t stride = 1;
  double frame_interval = 0.5;
};

struct DatasetSplit {
  std::vector<Scene> scenes;
  // Consecutive-frame runs too short to hold one window.
  std::size_t discarded_runs = 0;
  std::size_t duplicate_observations = 0;
};

/// Sliding windows over runs of consecutive frame ids. Agents present at the
/// last observed frame of a window form its agent axis.
DatasetSplit build_scenes(std::span<const FrameRecords> frames, const WindowOptions& options = {});
/// Windows of t_obs frames without ground truth. Scenes carry t_pred empty
/// future slots and has_future = false.
DatasetSplit build_observed_scenes(std::span<const FrameRecords> frames, std::size_t t_obs,
                                   std::size_t t_pred, std::size_t stride = 1,
                                   double frame_interval = 0.5);

/// Translates so the centroid of last-observed positions is the origin.
Scene normalize_scene(const Scene& scene);
Scene denormalize_scene(const Scene& scene);
Point2 to_global(const Scene& scene, Point2 p);

double wrap_angle(double a);

/// Rotates every position about the current origin and shifts headings.
Scene rotate_scene(const Scene& scene, double angle);
/// Uniform angle in [0, 2pi).
Scene random_rotation(const Scene& scene, nn::Rng& rng);

/// Flattens the scene back into frame records in global coordinates.
/// Future frames are included when the scene carries ground truth.
std::vector<FrameRecords> scene_to_records(const Scene& scene, long first_frame_id,
                                           long id_offset = 0);

}  // namespace trajformer::data
