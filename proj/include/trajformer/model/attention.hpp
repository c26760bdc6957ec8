#pragma once

#include <string>
#include <vector>

#include "trajformer/model/config.hpp"
#include "trajformer/model/params.hpp"
#include "trajformer/numerics/ops.hpp"

namespace trajformer::model {

struct AttentionRecord {
  std::string site;
  nn::Tensor weights;  // [B*h, Lq, Lk]
  nn::BoolTensor mask;  // admissible keys, same shape; empty for full attention
};

/// Per-call state threaded through a forward pass.
struct ForwardContext {
  bool training = false;
  nn::Rng* rng = nullptr;  // required when training with dropout
  // When set, every attention call appends its weights here.
  std::vector<AttentionRecord>* attention_log = nullptr;
  // Queries that had no admissible key (padded slots).
  std::size_t empty_attention_rows = 0;

  nn::Tensor dropout(const nn::Tensor& x, double p);
};

struct AttentionParams {
  nn::Tensor w_q, w_k, w_v;  // [d_model, d_model], heads packed along columns
  nn::Tensor w_o;            // [d_model, d_model]
};

struct LayerNormParams {
  nn::Tensor gain, bias;
};

struct FeedForwardParams {
  FeedForwardKind kind = FeedForwardKind::SeparableConv;
  nn::Tensor depthwise;  // [K, d_model]
  nn::Tensor pointwise;  // [d_model, d_model]
  nn::Tensor w1, b1, w2, b2;  // dense variant
};

AttentionParams make_attention(ParamStore& store, const std::string& prefix, std::size_t d_model,
                               nn::Rng& rng);
LayerNormParams make_layer_norm(ParamStore& store, const std::string& prefix, std::size_t d_model);
FeedForwardParams make_feed_forward(ParamStore& store, const std::string& prefix,
                                    FeedForwardKind kind, const ModelConfig& config, nn::Rng& rng);

/// Batched multi-head attention over [B, L, d_model] inputs. `mask` has shape
/// [B, Lq, Lk] (or is null) and is shared by all heads.
nn::Tensor multi_head_attention(const nn::Tensor& query_in, const nn::Tensor& kv_in,
                                const AttentionParams& params, std::size_t heads,
                                const nn::BoolTensor* mask, ForwardContext& ctx,
                                const char* site);

/// LayerNorm(x + Dropout(sublayer_out))
nn::Tensor add_and_norm(const nn::Tensor& x, const nn::Tensor& sublayer_out,
                        const LayerNormParams& norm, const ModelConfig& config,
                        ForwardContext& ctx);

/// Position-wise sub-layer over [T, N, d_model]; `causal` pads the separable
/// convolution on the past side only.
nn::Tensor feed_forward(const nn::Tensor& x, const FeedForwardParams& params, bool causal);

}  // namespace trajformer::model
