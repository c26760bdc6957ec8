#include "trajformer/model/network.hpp"

#include <sstream>
#include <stdexcept>

#include "trajformer/data/features.hpp"

namespace trajformer::model {

ModelInput assemble_input(std::span<const data::Scene> scenes, const ModelConfig& config) {
  if (scenes.empty()) throw std::invalid_argument("assemble_input: no scenes");
  ModelInput in;
  in.t_obs = config.t_obs;
  in.t_pred = config.t_pred;
  in.has_future = true;
  std::vector<graph::STGraph> graphs;
  std::size_t total = 0;
  for (const auto& s : scenes) {
    s.validate();
    if (s.t_obs != config.t_obs || s.t_pred != config.t_pred) {
      throw std::invalid_argument("scene window " + std::to_string(s.t_obs) + "+" +
                                  std::to_string(s.t_pred) + " does not match the model's " +
                                  std::to_string(config.t_obs) + "+" +
                                  std::to_string(config.t_pred));
    }
    graphs.push_back(graph::build_graph(s, config.spatial_limit));
    in.scene_offsets.push_back(total);
    total += s.num_agents();
    in.has_future = in.has_future && s.has_future;
  }
  in.scene_offsets.push_back(total);
  in.num_agents = total;
  in.graph = graphs.size() == 1 ? graphs.front() : graph::merge_graphs(graphs);
  in.keep = expand_presence(in.graph.padding_mask, config.d_model);

  const std::size_t width = config.input_width();
  const std::size_t t_obs = config.t_obs, t_pred = config.t_pred;
  std::vector<double> features(t_obs * total * width, 0.0);
  std::vector<double> start(total * 2, 0.0);
  std::vector<double> future(t_pred * total * 2, 0.0);
  in.future_valid.assign(t_pred * total, 0);
  for (std::size_t k = 0; k < scenes.size(); ++k) {
    const auto& s = scenes[k];
    const std::size_t n = s.num_agents();
    const std::size_t offset = in.scene_offsets[k];
    const auto enc = data::encode_features(s, config.features);
    for (std::size_t t = 0; t < t_obs; ++t)
      std::copy_n(enc.begin() + static_cast<long>(t * n * width), n * width,
                  features.begin() + static_cast<long>((t * total + offset) * width));
    for (std::size_t i = 0; i < n; ++i) {
      const auto last = s.last_observed(i);
      const std::size_t a = offset + i;
      start[a * 2] = last.x;
      start[a * 2 + 1] = last.y;
      data::Point2 held = last;
      for (std::size_t t = 0; t < t_pred; ++t) {
        if (s.has_future && s.present(t_obs + t, i)) {
          held = {s.fut(t, i, 0), s.fut(t, i, 1)};
          in.future_valid[t * total + a] = 1;
        }
        future[(t * total + a) * 2] = held.x;
        future[(t * total + a) * 2 + 1] = held.y;
      }
    }
  }
  in.features = nn::Tensor({t_obs, total, width}, std::move(features));
  in.start = nn::Tensor({1, total, 2}, std::move(start));
  in.future = nn::Tensor({t_pred, total, 2}, std::move(future));
  return in;
}

TrajectoryModel::TrajectoryModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  nn::Rng rng(seed);
  st_ = make_st_encoder(store_, config_, rng);
  temporal_ = make_temporal(store_, config_, rng);
}

nn::Tensor TrajectoryModel::encode(const ModelInput& input, ForwardContext& ctx) const {
  auto memory = st_encoder_forward(input.features, input.graph, input.keep, st_, config_, ctx);
  if (!config_.has_temporal_encoder()) return memory;
  return temporal_encoder_forward(memory, input.graph, input.keep, temporal_, config_, ctx);
}

nn::Tensor TrajectoryModel::decode(const nn::Tensor& prev_outputs, const nn::Tensor& enc_out,
                                   const ModelInput& input, ForwardContext& ctx) const {
  return temporal_decoder_step(prev_outputs, enc_out, input.graph, temporal_, config_, ctx);
}

nn::Tensor TrajectoryModel::predict_teacher_forced(const ModelInput& input,
                                                   ForwardContext& ctx) const {
  if (!input.has_future) {
    throw std::invalid_argument("teacher-forced decoding needs ground-truth futures");
  }
  const std::size_t steps = input.t_pred;
  const auto enc_out = encode(input, ctx);
  const std::vector<nn::Tensor> dec_parts{input.start, nn::slice(input.future, 0, 0, steps - 1)};
  const auto dec_out = decode(nn::concat(dec_parts, 0), enc_out, input, ctx);
  const std::vector<nn::Tensor> chain{input.start, generator_head(dec_out, temporal_)};
  return nn::slice(nn::cumsum(nn::concat(chain, 0), 0), 0, 1, steps + 1);
}

nn::Tensor TrajectoryModel::predict_autoregressive(const ModelInput& input,
                                                   ForwardContext& ctx) const {
  const auto enc_out = encode(input, ctx);
  std::vector<nn::Tensor> rows{input.start};
  for (std::size_t s = 1; s <= input.t_pred; ++s) {
    const auto dec_out = decode(nn::concat(rows, 0), enc_out, input, ctx);
    const auto step = generator_head(nn::slice(dec_out, 0, s - 1, s), temporal_);
    rows.push_back(nn::add(rows.back(), step));
  }
  return nn::concat(std::span<const nn::Tensor>(rows).subspan(1), 0);
}

std::string TrajectoryModel::metadata() const {
  std::ostringstream os;
  os << "format=trajformer-model\n";
  for (const auto& [k, v] : to_key_values(config_)) os << k << '=' << v << '\n';
  return os.str();
}

void save_model(const std::filesystem::path& path, const TrajectoryModel& model) {
  save_checkpoint(path, model.metadata(), model.params());
}

ModelConfig config_from_metadata(const std::string& metadata) {
  ModelConfig config;
  std::istringstream in(metadata);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key = line.substr(0, eq);
    if (key == "format") continue;
    if (!apply_key_value(config, key, line.substr(eq + 1))) {
      throw CheckpointError("unknown model key '" + key + "' in checkpoint metadata");
    }
  }
  return config;
}

TrajectoryModel load_model(const std::filesystem::path& path) {
  const auto ck = load_checkpoint(path);
  TrajectoryModel model(config_from_metadata(ck.metadata), 0);
  assign_parameters(model.params(), ck);
  return model;
}

Forecast generate_trajectory(const TrajectoryModel& model, const data::Scene& scene,
                             DecodeMode mode) {
  nn::NoGradGuard no_grad;
  const auto normalized = data::normalize_scene(scene);
  const auto input = assemble_input(std::span(&normalized, 1), model.config());
  ForwardContext ctx;
  const auto pred = mode == DecodeMode::TeacherForced ? model.predict_teacher_forced(input, ctx)
                                                      : model.predict_autoregressive(input, ctx);
  Forecast out(input.t_pred, input.num_agents);
  const auto values = pred.data();
  for (std::size_t t = 0; t < input.t_pred; ++t)
    for (std::size_t n = 0; n < input.num_agents; ++n) {
      const std::size_t i = (t * input.num_agents + n) * 2;
      out.set(t, n, data::to_global(normalized, {values[i], values[i + 1]}));
    }
  return out;
}

}  // namespace trajformer::model
