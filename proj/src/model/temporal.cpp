#include "trajformer/model/temporal.hpp"

#include <cmath>
#include <stdexcept>

namespace trajformer::model {

nn::Tensor positional_encoding(std::span<const std::size_t> positions, std::size_t d_model) {
  std::vector<double> table(positions.size() * d_model);
  for (std::size_t r = 0; r < positions.size(); ++r) {
    const double pos = static_cast<double>(positions[r]);
    for (std::size_t i = 0; i < d_model; i += 2) {
      const double angle =
          pos / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d_model));
      table[r * d_model + i] = std::sin(angle);
      if (i + 1 < d_model) table[r * d_model + i + 1] = std::cos(angle);
    }
  }
  return nn::Tensor({positions.size(), d_model}, std::move(table));
}

nn::Tensor positional_encoding(std::size_t count, std::size_t d_model) {
  std::vector<std::size_t> positions(count);
  for (std::size_t i = 0; i < count; ++i) positions[i] = i;
  return positional_encoding(positions, d_model);
}

TemporalParams make_temporal(ParamStore& store, const ModelConfig& config, nn::Rng& rng) {
  const std::size_t d = config.d_model;
  TemporalParams p;
  if (config.has_temporal_encoder()) {
    for (std::size_t l = 0; l < config.te_layers; ++l) {
      const std::string prefix = "te." + std::to_string(l);
      TemporalEncoderLayerParams layer;
      layer.attention = make_attention(store, prefix + ".attention", d, rng);
      layer.attention_norm = make_layer_norm(store, prefix + ".attention_norm", d);
      layer.feed_forward =
          make_feed_forward(store, prefix + ".ff", config.temporal_encoder, config, rng);
      layer.feed_forward_norm = make_layer_norm(store, prefix + ".ff_norm", d);
      p.encoder.push_back(std::move(layer));
    }
  }
  p.coord_embed_weight = store.xavier("td.embed.weight", {2, d}, 2, d, rng);
  p.coord_embed_bias = store.constant("td.embed.bias", {d}, 0.0);
  for (std::size_t l = 0; l < config.td_layers; ++l) {
    const std::string prefix = "td." + std::to_string(l);
    TemporalDecoderLayerParams layer;
    layer.self_attention = make_attention(store, prefix + ".self_attention", d, rng);
    layer.self_norm = make_layer_norm(store, prefix + ".self_norm", d);
    layer.cross_attention = make_attention(store, prefix + ".cross_attention", d, rng);
    layer.cross_norm = make_layer_norm(store, prefix + ".cross_norm", d);
    layer.feed_forward = make_feed_forward(store, prefix + ".ff", config.decoder_ff, config, rng);
    layer.feed_forward_norm = make_layer_norm(store, prefix + ".ff_norm", d);
    p.decoder.push_back(std::move(layer));
  }
  p.generator_weight = store.xavier("generator.weight", {d, 2}, d, 2, rng);
  p.generator_bias = store.constant("generator.bias", {2}, 0.0);
  return p;
}

namespace {

// [T, N, d] <-> [N, T, d]
nn::Tensor swap_time_agent(const nn::Tensor& x) { return nn::permute(x, {1, 0, 2}); }

}  // namespace

nn::Tensor temporal_encoder_forward(const nn::Tensor& memory, const graph::STGraph& graph,
                                    std::span<const std::uint8_t> keep,
                                    const TemporalParams& params, const ModelConfig& config,
                                    ForwardContext& ctx) {
  nn::Tensor h = memory;
  for (const auto& layer : params.encoder) {
    auto per_agent = swap_time_agent(h);
    auto att = multi_head_attention(per_agent, per_agent, layer.attention, config.heads,
                                    &graph.temporal_mask, ctx, "temporal_encoder");
    h = nn::apply_mask(add_and_norm(h, swap_time_agent(att), layer.attention_norm, config, ctx),
                       keep);
    auto ff = feed_forward(h, layer.feed_forward, /*causal=*/false);
    h = nn::apply_mask(add_and_norm(h, ff, layer.feed_forward_norm, config, ctx), keep);
  }
  return h;
}

nn::BoolTensor causal_mask(std::size_t batch, std::size_t steps) {
  nn::BoolTensor mask({batch, steps, steps}, false);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < steps; ++i)
      for (std::size_t j = 0; j <= i; ++j) mask.values[(b * steps + i) * steps + j] = 1;
  return mask;
}

nn::Tensor temporal_decoder_step(const nn::Tensor& prev_outputs, const nn::Tensor& enc_out,
                                 const graph::STGraph& graph, const TemporalParams& params,
                                 const ModelConfig& config, ForwardContext& ctx) {
  if (prev_outputs.rank() != 3 || prev_outputs.dim(2) != 2) {
    throw nn::DimensionError("decoder input must be [S, N, 2], got " +
                             nn::shape_to_string(prev_outputs.shape()));
  }
  const std::size_t steps = prev_outputs.dim(0);
  const std::size_t agents = prev_outputs.dim(1);
  const std::size_t d = config.d_model;
  if (steps == 0) throw std::invalid_argument("decoder needs at least the start token (S >= 1)");
  if (enc_out.dim(1) != agents) {
    throw nn::DimensionError("decoder has " + std::to_string(agents) +
                             " agents but encoder output " +
                             nn::shape_to_string(enc_out.shape()));
  }

  // Positional encodings broadcast over agents.
  const auto pe = positional_encoding(steps, d);
  std::vector<double> pe_full(steps * agents * d);
  for (std::size_t s = 0; s < steps; ++s)
    for (std::size_t n = 0; n < agents; ++n)
      std::copy_n(pe.data().begin() + static_cast<long>(s * d), d,
                  pe_full.begin() + static_cast<long>((s * agents + n) * d));
  nn::Tensor x = nn::linear(prev_outputs, params.coord_embed_weight, params.coord_embed_bias);
  x = ctx.dropout(nn::add(x, nn::Tensor({steps, agents, d}, std::move(pe_full))), config.dropout);

  const auto self_mask = causal_mask(agents, steps);
  const std::size_t frames = enc_out.dim(0);
  nn::BoolTensor cross_mask({agents, steps, frames}, false);
  for (std::size_t n = 0; n < agents; ++n)
    for (std::size_t s = 0; s < steps; ++s)
      for (std::size_t t = 0; t < frames; ++t)
        cross_mask.values[(n * steps + s) * frames + t] = graph.present(t, n);
  const auto memory = swap_time_agent(enc_out);

  for (const auto& layer : params.decoder) {
    auto per_agent = swap_time_agent(x);
    auto self_att = multi_head_attention(per_agent, per_agent, layer.self_attention, config.heads,
                                         &self_mask, ctx, "decoder_self");
    x = add_and_norm(x, swap_time_agent(self_att), layer.self_norm, config, ctx);
    per_agent = swap_time_agent(x);
    auto cross = multi_head_attention(per_agent, memory, layer.cross_attention, config.heads,
                                      &cross_mask, ctx, "decoder_cross");
    x = add_and_norm(x, swap_time_agent(cross), layer.cross_norm, config, ctx);
    auto ff = feed_forward(x, layer.feed_forward, /*causal=*/true);
    x = add_and_norm(x, ff, layer.feed_forward_norm, config, ctx);
  }
  return x;
}

nn::Tensor generator_head(const nn::Tensor& dec_out, const TemporalParams& params) {
  return nn::linear(dec_out, params.generator_weight, params.generator_bias);
}

}  // namespace trajformer::model
