#include "trajformer/data/scene.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

namespace trajformer::data {

Scene::Scene(std::size_t obs, std::size_t pred, std::vector<SceneAgent> agent_list)
    : t_obs(obs), t_pred(pred), agents(std::move(agent_list)) {
  const std::size_t n = agents.size();
  history.assign(t_obs * n * kHistoryFields, 0.0);
  future.assign(t_pred * n * 2, 0.0);
  presence.assign((t_obs + t_pred) * n, 0);
}

Point2 Scene::position(std::size_t t, std::size_t n) const {
  if (t < t_obs) return {hist(t, n, kX), hist(t, n, kY)};
  return {fut(t - t_obs, n, 0), fut(t - t_obs, n, 1)};
}

void Scene::validate() const {
  const std::size_t n = agents.size();
  if (t_obs == 0) throw std::invalid_argument("scene has no observed frames");
  if (history.size() != t_obs * n * kHistoryFields || future.size() != t_pred * n * 2 ||
      presence.size() != (t_obs + t_pred) * n) {
    throw std::invalid_argument("scene buffers do not match t_obs=" + std::to_string(t_obs) +
                                ", t_pred=" + std::to_string(t_pred) +
                                ", agents=" + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!present(t_obs - 1, i)) {
      throw std::invalid_argument("agent " + std::to_string(agents[i].id) +
                                  " is absent at the last observed frame");
    }
  }
}

namespace {

// Windows of `window` frames; scenes get t_pred future slots, filled from the
// window when it extends past t_obs.
DatasetSplit build_windows(std::span<const FrameRecords> frames, std::size_t t_obs,
                           std::size_t window, std::size_t t_pred, std::size_t stride,
                           double frame_interval) {
  DatasetSplit split;
  // Split into runs of consecutive frame ids.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = 0; i < frames.size();) {
    std::size_t j = i + 1;
    while (j < frames.size() && frames[j].frame_id == frames[j - 1].frame_id + 1) ++j;
    runs.emplace_back(i, j);
    i = j;
  }

  for (auto [begin, end] : runs) {
    const std::size_t len = end - begin;
    if (len < window) {
      ++split.discarded_runs;
      continue;
    }
    // Per frame: agent id -> state, first occurrence wins.
    std::vector<std::map<long, AgentState>> lookup(len);
    for (std::size_t f = 0; f < len; ++f) {
      for (const auto& a : frames[begin + f].agents) {
        if (!lookup[f].emplace(a.agent_id, a).second) ++split.duplicate_observations;
      }
    }
    for (std::size_t start = 0; start + window <= len; start += stride) {
      const auto& anchor = lookup[start + t_obs - 1];
      std::vector<SceneAgent> agents;
      agents.reserve(anchor.size());
      for (const auto& [id, state] : anchor) agents.push_back({id, state.category});

      Scene scene(t_obs, t_pred, agents);
      scene.frame_interval = frame_interval;
      scene.has_future = window > t_obs;
      scene.first_frame_id = frames[begin + start].frame_id;
      for (std::size_t t = 0; t < window; ++t) {
        const auto& frame = lookup[start + t];
        for (std::size_t n = 0; n < agents.size(); ++n) {
          auto it = frame.find(agents[n].id);
          if (it == frame.end()) continue;
          const AgentState& s = it->second;
          scene.set_present(t, n, true);
          if (t < t_obs) {
            scene.hist(t, n, kX) = s.x;
            scene.hist(t, n, kY) = s.y;
            scene.hist(t, n, kLength) = s.length;
            scene.hist(t, n, kWidth) = s.width;
            scene.hist(t, n, kHeading) = s.heading;
            scene.hist(t, n, kCategory) = static_cast<double>(static_cast<int>(agents[n].category));
          } else {
            scene.fut(t - t_obs, n, 0) = s.x;
            scene.fut(t - t_obs, n, 1) = s.y;
          }
        }
      }
      split.scenes.push_back(std::move(scene));
    }
  }
  return split;
}

}  // namespace

DatasetSplit build_scenes(std::span<const FrameRecords> frames, const WindowOptions& options) {
  if (options.t_obs == 0 || options.t_obs >= options.t_total || options.stride == 0) {
    throw std::invalid_argument("window options require 0 < t_obs < t_total and stride > 0");
  }
  return build_windows(frames, options.t_obs, options.t_total, options.t_total - options.t_obs,
                       options.stride, options.frame_interval);
}

DatasetSplit build_observed_scenes(std::span<const FrameRecords> frames, std::size_t t_obs,
                                   std::size_t t_pred, std::size_t stride, double frame_interval) {
  if (t_obs == 0 || stride == 0) {
    throw std::invalid_argument("observed windows require t_obs > 0 and stride > 0");
  }
  return build_windows(frames, t_obs, t_obs, t_pred, stride, frame_interval);
}

namespace {

template <typename Fn>
void for_each_position(Scene& scene, Fn&& fn) {
  const std::size_t n = scene.num_agents();
  for (std::size_t t = 0; t < scene.t_obs; ++t)
    for (std::size_t i = 0; i < n; ++i) {
      if (!scene.present(t, i)) continue;
      fn(scene.hist(t, i, kX), scene.hist(t, i, kY));
    }
  if (!scene.has_future) return;
  for (std::size_t t = 0; t < scene.t_pred; ++t)
    for (std::size_t i = 0; i < n; ++i) {
      if (!scene.present(scene.t_obs + t, i)) continue;
      fn(scene.fut(t, i, 0), scene.fut(t, i, 1));
    }
}

}  // namespace

Scene normalize_scene(const Scene& scene) {
  scene.validate();
  Scene out = scene;
  const std::size_t n = scene.num_agents();
  if (n == 0) return out;
  Point2 centroid;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = scene.last_observed(i);
    centroid.x += p.x;
    centroid.y += p.y;
  }
  centroid.x /= static_cast<double>(n);
  centroid.y /= static_cast<double>(n);
  for_each_position(out, [&](double& x, double& y) {
    x -= centroid.x;
    y -= centroid.y;
  });
  out.origin = {scene.origin.x + centroid.x, scene.origin.y + centroid.y};
  return out;
}

Scene denormalize_scene(const Scene& scene) {
  Scene out = scene;
  const Point2 c = scene.origin;
  for_each_position(out, [&](double& x, double& y) {
    x += c.x;
    y += c.y;
  });
  out.origin = {};
  return out;
}

Point2 to_global(const Scene& scene, Point2 p) {
  return {p.x + scene.origin.x, p.y + scene.origin.y};
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a, two_pi);
  if (w > std::numbers::pi) w -= two_pi;
  if (w <= -std::numbers::pi) w += two_pi;
  return w;
}

Scene rotate_scene(const Scene& scene, double angle) {
  Scene out = scene;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for_each_position(out, [&](double& x, double& y) {
    const double rx = c * x - s * y;
    const double ry = s * x + c * y;
    x = rx;
    y = ry;
  });
  for (std::size_t t = 0; t < out.t_obs; ++t)
    for (std::size_t i = 0; i < out.num_agents(); ++i)
      if (out.present(t, i)) out.hist(t, i, kHeading) = wrap_angle(out.hist(t, i, kHeading) + angle);
  return out;
}

Scene random_rotation(const Scene& scene, nn::Rng& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  return rotate_scene(scene, angle(rng));
}

std::vector<FrameRecords> scene_to_records(const Scene& scene, long first_frame_id,
                                           long id_offset) {
  const std::size_t n = scene.num_agents();
  const std::size_t frames = scene.has_future ? scene.total_frames() : scene.t_obs;
  std::vector<FrameRecords> out(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    out[t].frame_id = first_frame_id + static_cast<long>(t);
    for (std::size_t i = 0; i < n; ++i) {
      if (!scene.present(t, i)) continue;
      AgentState a;
      a.agent_id = scene.agents[i].id + id_offset;
      a.category = scene.agents[i].category;
      const Point2 p = to_global(scene, scene.position(t, i));
      a.x = p.x;
      a.y = p.y;
      const std::size_t src = std::min(t, scene.t_obs - 1);
      a.length = scene.hist(src, i, kLength);
      a.width = scene.hist(src, i, kWidth);
      a.heading = scene.hist(src, i, kHeading);
      if (t >= scene.t_obs) {
        const Point2 prev = scene.position(t - 1, i);
        const Point2 cur = scene.position(t, i);
        const double dx = cur.x - prev.x, dy = cur.y - prev.y;
        if (std::hypot(dx, dy) > 1e-9 && scene.present(t - 1, i)) a.heading = std::atan2(dy, dx);
      }
      out[t].agents.push_back(a);
    }
  }
  return out;
}

}  // namespace trajformer::data
