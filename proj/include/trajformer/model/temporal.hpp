#pragma once

#include <span>
#include <vector>

#include "trajformer/graph/st_graph.hpp"
#include "trajformer/model/attention.hpp"

namespace trajformer::model {

/// Sinusoid table: column 2i holds sin(pos / 10000^(2i/d)), column 2i+1 the
/// matching cosine. Result is a constant [positions.size(), d_model] tensor.
nn::Tensor positional_encoding(std::span<const std::size_t> positions, std::size_t d_model);
/// Rows for positions 0 .. count-1.
nn::Tensor positional_encoding(std::size_t count, std::size_t d_model);

struct TemporalEncoderLayerParams {
  AttentionParams attention;  // W_u is attention.w_o
  LayerNormParams attention_norm;
  FeedForwardParams feed_forward;
  LayerNormParams feed_forward_norm;
};

struct TemporalDecoderLayerParams {
  AttentionParams self_attention;
  LayerNormParams self_norm;
  AttentionParams cross_attention;
  LayerNormParams cross_norm;
  FeedForwardParams feed_forward;
  LayerNormParams feed_forward_norm;
};

struct TemporalParams {
  std::vector<TemporalEncoderLayerParams> encoder;
  nn::Tensor coord_embed_weight;  // [2, d_model]
  nn::Tensor coord_embed_bias;    // [d_model]
  std::vector<TemporalDecoderLayerParams> decoder;
  nn::Tensor generator_weight;  // [d_model, 2]
  nn::Tensor generator_bias;    // [2]
};

TemporalParams make_temporal(ParamStore& store, const ModelConfig& config, nn::Rng& rng);

/// Per-agent self-attention across frames, each layer followed by the
/// configured position-wise sub-layer. Agents never exchange information.
nn::Tensor temporal_encoder_forward(const nn::Tensor& memory, const graph::STGraph& graph,
                                    std::span<const std::uint8_t> keep,
                                    const TemporalParams& params, const ModelConfig& config,
                                    ForwardContext& ctx);

/// Lower-triangular [batch, S, S] mask.
nn::BoolTensor causal_mask(std::size_t batch, std::size_t steps);

/// Decoder over S >= 1 previous coordinate rows [S, N, 2]; returns [S, N, d].
/// Row s depends only on rows <= s of `prev_outputs`.
nn::Tensor temporal_decoder_step(const nn::Tensor& prev_outputs, const nn::Tensor& enc_out,
                                 const graph::STGraph& graph, const TemporalParams& params,
                                 const ModelConfig& config, ForwardContext& ctx);

/// Per-step displacement head: [S, N, d] -> [S, N, 2].
nn::Tensor generator_head(const nn::Tensor& dec_out, const TemporalParams& params);

}  // namespace trajformer::model
