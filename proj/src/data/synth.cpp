#include "trajformer/data/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trajformer::data {

namespace {

struct Footprint {
  double length;
  double width;
};

Footprint footprint(Category c) {
  switch (c) {
    case Category::SmallVehicle: return {4.5, 2.0};
    case Category::BigVehicle: return {10.0, 2.5};
    case Category::Pedestrian: return {0.6, 0.6};
    case Category::Cyclist: return {1.8, 0.7};
    case Category::Other: return {1.0, 1.0};
  }
  return {1.0, 1.0};
}

double uniform(nn::Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_count(nn::Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Category random_category(nn::Rng& rng) {
  return static_cast<Category>(std::uniform_int_distribution<int>(1, 4)(rng));
}

SynthTrack make_track(Category c) {
  SynthTrack track;
  track.category = c;
  const auto fp = footprint(c);
  track.length = fp.length;
  track.width = fp.width;
  return track;
}

}  // namespace

const char* synth_kind_name(SynthKind kind) {
  switch (kind) {
    case SynthKind::ConstantVelocity: return "constant_velocity";
    case SynthKind::Turn: return "turn";
    case SynthKind::Crossing: return "crossing";
    case SynthKind::Stationary: return "stationary";
  }
  return "constant_velocity";
}

std::vector<std::string> synth_kind_names() {
  return {"constant_velocity", "turn", "crossing", "stationary"};
}

SynthKind parse_synth_kind(const std::string& name) {
  for (auto kind : {SynthKind::ConstantVelocity, SynthKind::Turn, SynthKind::Crossing,
                    SynthKind::Stationary}) {
    if (name == synth_kind_name(kind)) return kind;
  }
  throw std::invalid_argument("unknown scene kind '" + name +
                              "' (expected constant_velocity, turn, crossing, stationary)");
}

Scene scene_from_tracks(std::span<const SynthTrack> tracks, std::size_t t_obs,
                        std::size_t t_pred) {
  std::vector<SceneAgent> agents;
  for (std::size_t i = 0; i < tracks.size(); ++i)
    agents.push_back({static_cast<long>(i + 1), tracks[i].category});
  Scene scene(t_obs, t_pred, std::move(agents));
  const std::size_t frames = t_obs + t_pred;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto& track = tracks[i];
    if (track.positions.size() != frames) {
      throw std::invalid_argument("synthetic track has " + std::to_string(track.positions.size()) +
                                  " positions, expected " + std::to_string(frames));
    }
    for (std::size_t t = 0; t < frames; ++t) {
      scene.set_present(t, i, true);
      const Point2 p = track.positions[t];
      if (t >= t_obs) {
        scene.fut(t - t_obs, i, 0) = p.x;
        scene.fut(t - t_obs, i, 1) = p.y;
        continue;
      }
      double heading = 0.0;
      if (!track.headings.empty()) {
        heading = track.headings[t];
      } else {
        const Point2 a = track.positions[t];
        const Point2 b = track.positions[t + 1];
        if (std::hypot(b.x - a.x, b.y - a.y) > 0.0) heading = std::atan2(b.y - a.y, b.x - a.x);
      }
      scene.hist(t, i, kX) = p.x;
      scene.hist(t, i, kY) = p.y;
      scene.hist(t, i, kLength) = track.length;
      scene.hist(t, i, kWidth) = track.width;
      scene.hist(t, i, kHeading) = wrap_angle(heading);
      scene.hist(t, i, kCategory) = static_cast<double>(static_cast<int>(track.category));
    }
  }
  return scene;
}

SynthTrack constant_velocity_track(Point2 start, Point2 velocity, std::size_t frames,
                                   Category category) {
  SynthTrack track = make_track(category);
  for (std::size_t t = 0; t < frames; ++t) {
    const double s = static_cast<double>(t);
    track.positions.push_back({start.x + velocity.x * s, start.y + velocity.y * s});
  }
  return track;
}

Scene synth_scene(SynthKind kind, nn::Rng& rng, std::size_t t_obs, std::size_t t_pred) {
  const std::size_t frames = t_obs + t_pred;
  std::vector<SynthTrack> tracks;
  switch (kind) {
    case SynthKind::ConstantVelocity: {
      const std::size_t count = uniform_count(rng, 1, 3);
      for (std::size_t i = 0; i < count; ++i) {
        const Point2 start{uniform(rng, -30.0, 30.0), uniform(rng, -30.0, 30.0)};
        const double speed = uniform(rng, 0.5, 3.0);
        const double dir = uniform(rng, -std::numbers::pi, std::numbers::pi);
        tracks.push_back(constant_velocity_track(
            start, {speed * std::cos(dir), speed * std::sin(dir)}, frames, random_category(rng)));
      }
      break;
    }
    case SynthKind::Turn: {
      const std::size_t count = uniform_count(rng, 1, 2);
      for (std::size_t i = 0; i < count; ++i) {
        SynthTrack track = make_track(random_category(rng));
        const Point2 start{uniform(rng, -30.0, 30.0), uniform(rng, -30.0, 30.0)};
        const double speed = uniform(rng, 1.0, 3.0);
        const double heading0 = uniform(rng, -std::numbers::pi, std::numbers::pi);
        double yaw_rate = uniform(rng, 0.15, 0.35);
        if (uniform(rng, 0.0, 1.0) < 0.5) yaw_rate = -yaw_rate;
        const double radius = speed / yaw_rate;
        for (std::size_t t = 0; t < frames; ++t) {
          const double h = heading0 + yaw_rate * static_cast<double>(t);
          track.positions.push_back({start.x + radius * (std::sin(h) - std::sin(heading0)),
                                     start.y - radius * (std::cos(h) - std::cos(heading0))});
          track.headings.push_back(h);
        }
        tracks.push_back(std::move(track));
      }
      break;
    }
    case SynthKind::Crossing: {
      // Both agents reach the crossing point at the same (midpoint) frame.
      const Point2 cross{uniform(rng, -10.0, 10.0), uniform(rng, -10.0, 10.0)};
      const double dir_a = uniform(rng, -std::numbers::pi, std::numbers::pi);
      const double dir_b = dir_a + uniform(rng, std::numbers::pi / 3.0, 2.0 * std::numbers::pi / 3.0);
      const double mid = static_cast<double>(frames / 2);
      for (double dir : {dir_a, dir_b}) {
        const double speed = uniform(rng, 0.8, 2.5);
        const Point2 v{speed * std::cos(dir), speed * std::sin(dir)};
        tracks.push_back(constant_velocity_track({cross.x - v.x * mid, cross.y - v.y * mid}, v,
                                                 frames, random_category(rng)));
      }
      break;
    }
    case SynthKind::Stationary: {
      const std::size_t count = uniform_count(rng, 1, 3);
      for (std::size_t i = 0; i < count; ++i) {
        SynthTrack track = make_track(random_category(rng));
        const Point2 p{uniform(rng, -30.0, 30.0), uniform(rng, -30.0, 30.0)};
        const double heading = uniform(rng, -std::numbers::pi, std::numbers::pi);
        track.positions.assign(frames, p);
        track.headings.assign(frames, heading);
        tracks.push_back(std::move(track));
      }
      break;
    }
  }
  return scene_from_tracks(tracks, t_obs, t_pred);
}

}  // namespace trajformer::data
