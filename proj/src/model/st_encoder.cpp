#include "trajformer/model/st_encoder.hpp"

#include <stdexcept>

namespace trajformer::model {

STEncoderParams make_st_encoder(ParamStore& store, const ModelConfig& config, nn::Rng& rng) {
  const std::size_t d = config.d_model;
  const std::size_t f = config.input_width();
  const std::size_t k = config.tcn_kernel;
  STEncoderParams p;
  p.embed_weight = store.xavier("embed.weight", {f, d}, f, d, rng);
  p.embed_bias = store.constant("embed.bias", {d}, 0.0);
  for (std::size_t l = 0; l < config.st_layers; ++l) {
    const std::string prefix = "st." + std::to_string(l);
    STLayerParams layer;
    if (config.spatial_attention) {
      layer.spatial = make_attention(store, prefix + ".spatial", d, rng);
      if (config.norm_after_spatial) layer.spatial_norm = make_layer_norm(store, prefix + ".spatial_norm", d);
    }
    if (config.tcn) {
      layer.tcn_kernel = store.xavier(prefix + ".tcn.kernel", {k, 1, d, d}, k * d, k * d, rng);
      layer.tcn_norm = make_layer_norm(store, prefix + ".tcn_norm", d);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

std::vector<std::uint8_t> expand_presence(const nn::BoolTensor& padding, std::size_t channels) {
  std::vector<std::uint8_t> keep(padding.numel() * channels);
  for (std::size_t i = 0; i < padding.numel(); ++i)
    std::fill_n(keep.begin() + static_cast<long>(i * channels), channels, padding.values[i]);
  return keep;
}

nn::Tensor embed_inputs(const nn::Tensor& features, const STEncoderParams& params,
                        std::span<const std::uint8_t> keep) {
  if (features.rank() != 3 || features.dim(2) != params.embed_weight.dim(0)) {
    throw std::invalid_argument("input features " + nn::shape_to_string(features.shape()) +
                                " do not match the configured encoding width " +
                                std::to_string(params.embed_weight.dim(0)));
  }
  return nn::apply_mask(nn::linear(features, params.embed_weight, params.embed_bias), keep);
}

nn::Tensor spatial_self_attention(const nn::Tensor& h, const nn::BoolTensor& spatial_mask,
                                  const AttentionParams& params, std::size_t heads,
                                  ForwardContext& ctx) {
  // Frames act as the batch axis, agents as the sequence axis.
  return multi_head_attention(h, h, params, heads, &spatial_mask, ctx, "spatial");
}

nn::Tensor tcn_sublayer(const nn::Tensor& h, const nn::Tensor& kernel, const LayerNormParams& norm,
                        const ModelConfig& config, ForwardContext& ctx) {
  const auto conv =
      nn::conv2d_temporal(h, kernel, nn::TemporalPadding::symmetric(kernel.dim(0)));
  return add_and_norm(h, conv, norm, config, ctx);
}

nn::Tensor st_encoder_forward(const nn::Tensor& features, const graph::STGraph& graph,
                              std::span<const std::uint8_t> keep, const STEncoderParams& params,
                              const ModelConfig& config, ForwardContext& ctx) {
  nn::Tensor h = embed_inputs(features, params, keep);
  for (const auto& layer : params.layers) {
    if (config.spatial_attention) {
      auto att = spatial_self_attention(h, graph.spatial_mask, layer.spatial, config.heads, ctx);
      if (config.norm_after_spatial) {
        h = add_and_norm(h, att, layer.spatial_norm, config, ctx);
      } else {
        h = nn::add(h, ctx.dropout(att, config.dropout));
      }
      h = nn::apply_mask(h, keep);
    }
    if (config.tcn) {
      h = nn::apply_mask(tcn_sublayer(h, layer.tcn_kernel, layer.tcn_norm, config, ctx), keep);
    }
  }
  return h;
}

}  // namespace trajformer::model
