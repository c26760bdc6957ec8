#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trajformer/data/scene.hpp"
#include "trajformer/graph/st_graph.hpp"
#include "trajformer/model/checkpoint.hpp"
#include "trajformer/model/st_encoder.hpp"
#include "trajformer/model/temporal.hpp"

namespace trajformer::model {

/// One or more normalized scenes packed on the agent axis. Spatial edges never
/// cross scene boundaries, so a batch is a disjoint union of scene graphs.
struct ModelInput {
  std::size_t t_obs = 0;
  std::size_t t_pred = 0;
  std::size_t num_agents = 0;
  nn::Tensor features;  // [t_obs, N, F_in]
  graph::STGraph graph;
  std::vector<std::uint8_t> keep;  // [t_obs, N, d_model]
  nn::Tensor start;                // [1, N, 2] last observed positions
  bool has_future = false;
  nn::Tensor future;                     // [t_pred, N, 2]; gaps hold the previous value
  std::vector<std::uint8_t> future_valid;  // [t_pred, N]
  std::vector<std::size_t> scene_offsets;  // first agent of each scene, plus N at the end
};

ModelInput assemble_input(std::span<const data::Scene> normalized_scenes,
                          const ModelConfig& config);

class TrajectoryModel {
 public:
  TrajectoryModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const STEncoderParams& st_params() const { return st_; }
  const TemporalParams& temporal_params() const { return temporal_; }

  /// Spatio-temporal encoder followed by the temporal encoder (when enabled).
  nn::Tensor encode(const ModelInput& input, ForwardContext& ctx) const;
  nn::Tensor decode(const nn::Tensor& prev_outputs, const nn::Tensor& enc_out,
                    const ModelInput& input, ForwardContext& ctx) const;

  /// Ground truth shifted right behind the start token; returns [t_pred, N, 2].
  nn::Tensor predict_teacher_forced(const ModelInput& input, ForwardContext& ctx) const;
  /// Feeds each predicted position back as the next decoder input.
  nn::Tensor predict_autoregressive(const ModelInput& input, ForwardContext& ctx) const;

  std::string metadata() const;

 private:
  ModelConfig config_;
  ParamStore store_;
  STEncoderParams st_;
  TemporalParams temporal_;
};

void save_model(const std::filesystem::path& path, const TrajectoryModel& model);
/// Rebuilds the configuration from the checkpoint metadata, then loads weights.
TrajectoryModel load_model(const std::filesystem::path& path);
ModelConfig config_from_metadata(const std::string& metadata);

/// Future positions per agent in global coordinates.
struct Forecast {
  std::size_t t_pred = 0;
  std::size_t num_agents = 0;
  std::vector<double> positions;       // [t_pred, N, 2]
  std::vector<std::uint8_t> valid;     // [t_pred, N]

  Forecast() = default;
  Forecast(std::size_t steps, std::size_t agents)
      : t_pred(steps), num_agents(agents), positions(steps * agents * 2, 0.0),
        valid(steps * agents, 1) {}
  data::Point2 at(std::size_t t, std::size_t n) const {
    return {positions[(t * num_agents + n) * 2], positions[(t * num_agents + n) * 2 + 1]};
  }
  void set(std::size_t t, std::size_t n, data::Point2 p) {
    positions[(t * num_agents + n) * 2] = p.x;
    positions[(t * num_agents + n) * 2 + 1] = p.y;
  }
};

enum class DecodeMode { Autoregressive, TeacherForced };

/// Evaluation-mode forecast for a scene in global coordinates.
Forecast generate_trajectory(const TrajectoryModel& model, const data::Scene& scene,
                             DecodeMode mode = DecodeMode::Autoregressive);

}  // namespace trajformer::model
