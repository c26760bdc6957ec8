#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trajformer/graph/st_graph.hpp"
#include "trajformer/model/attention.hpp"

namespace trajformer::model {

struct STLayerParams {
  AttentionParams spatial;
  LayerNormParams spatial_norm;
  nn::Tensor tcn_kernel;  // [K, 1, d_model, d_model]
  LayerNormParams tcn_norm;
};

struct STEncoderParams {
  nn::Tensor embed_weight;  // [F_in, d_model]
  nn::Tensor embed_bias;    // [d_model]
  std::vector<STLayerParams> layers;
};

STEncoderParams make_st_encoder(ParamStore& store, const ModelConfig& config, nn::Rng& rng);

/// Shared affine embedding of [T, N, F_in] features; padded slots are
/// re-zeroed through `keep` (shape [T, N, d_model]).
nn::Tensor embed_inputs(const nn::Tensor& features, const STEncoderParams& params,
                        std::span<const std::uint8_t> keep);

/// Multi-head attention across agents within each frame; returns the
/// projected heads (no residual). `spatial_mask` is [T, N, N].
nn::Tensor spatial_self_attention(const nn::Tensor& h, const nn::BoolTensor& spatial_mask,
                                  const AttentionParams& params, std::size_t heads,
                                  ForwardContext& ctx);

/// Temporal K x 1 convolution, dropout, residual, layer norm.
nn::Tensor tcn_sublayer(const nn::Tensor& h, const nn::Tensor& kernel, const LayerNormParams& norm,
                        const ModelConfig& config, ForwardContext& ctx);

/// Embedding followed by the interleaved spatial / temporal-convolution stack.
nn::Tensor st_encoder_forward(const nn::Tensor& features, const graph::STGraph& graph,
                              std::span<const std::uint8_t> keep, const STEncoderParams& params,
                              const ModelConfig& config, ForwardContext& ctx);

/// Expands a [T, N] presence mask over the channel axis.
std::vector<std::uint8_t> expand_presence(const nn::BoolTensor& padding, std::size_t channels);

}  // namespace trajformer::model
