#pragma once

#include <span>
#include <string>
#include <vector>

#include "trajformer/data/scene.hpp"

namespace trajformer::data {

enum class SynthKind { ConstantVelocity, Turn, Crossing, Stationary };

const char* synth_kind_name(SynthKind kind);
SynthKind parse_synth_kind(const std::string& name);
std::vector<std::string> synth_kind_names();

/// Fully specified agent path: one position per frame of the window.
struct SynthTrack {
  Category category = Category::SmallVehicle;
  double length = 4.5;
  double width = 2.0;
  std::vector<Point2> positions;
  // Heading per frame; empty derives it from the direction of travel.
  std::vector<double> headings;
};

/// Builds a fully observed scene from explicit tracks.
Scene scene_from_tracks(std::span<const SynthTrack> tracks, std::size_t t_obs = 6,
                        std::size_t t_pred = 6);

/// Point moving from `start` by `velocity` metres per frame.
SynthTrack constant_velocity_track(Point2 start, Point2 velocity, std::size_t frames,
                                   Category category = Category::SmallVehicle);

/// Random scene of the given archetype with analytic ground truth.
Scene synth_scene(SynthKind kind, nn::Rng& rng, std::size_t t_obs = 6, std::size_t t_pred = 6);

}  // namespace trajformer::data
