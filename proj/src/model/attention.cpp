#include "trajformer/model/attention.hpp"

#include <stdexcept>

namespace trajformer::model {

nn::Tensor ForwardContext::dropout(const nn::Tensor& x, double p) {
  if (!training || p == 0.0) return x;
  if (!rng) throw std::logic_error("training forward pass needs an RNG for dropout");
  return nn::dropout(x, p, training, *rng);
}

AttentionParams make_attention(ParamStore& store, const std::string& prefix, std::size_t d,
                               nn::Rng& rng) {
  AttentionParams p;
  p.w_q = store.xavier(prefix + ".w_q", {d, d}, d, d, rng);
  p.w_k = store.xavier(prefix + ".w_k", {d, d}, d, d, rng);
  p.w_v = store.xavier(prefix + ".w_v", {d, d}, d, d, rng);
  p.w_o = store.xavier(prefix + ".w_o", {d, d}, d, d, rng);
  return p;
}

LayerNormParams make_layer_norm(ParamStore& store, const std::string& prefix, std::size_t d) {
  return {store.constant(prefix + ".gain", {d}, 1.0), store.constant(prefix + ".bias", {d}, 0.0)};
}

FeedForwardParams make_feed_forward(ParamStore& store, const std::string& prefix,
                                    FeedForwardKind kind, const ModelConfig& config,
                                    nn::Rng& rng) {
  FeedForwardParams p;
  p.kind = kind;
  const std::size_t d = config.d_model;
  if (kind == FeedForwardKind::SeparableConv) {
    const std::size_t k = config.sep_kernel;
    p.depthwise = store.xavier(prefix + ".depthwise", {k, d}, k, k, rng);
    p.pointwise = store.xavier(prefix + ".pointwise", {d, d}, d, d, rng);
  } else if (kind == FeedForwardKind::Dense) {
    const std::size_t h = config.ff_hidden;
    p.w1 = store.xavier(prefix + ".w1", {d, h}, d, h, rng);
    p.b1 = store.constant(prefix + ".b1", {h}, 0.0);
    p.w2 = store.xavier(prefix + ".w2", {h, d}, h, d, rng);
    p.b2 = store.constant(prefix + ".b2", {d}, 0.0);
  }
  return p;
}

namespace {

// [B, L, h*dk] -> [B*h, L, dk]
nn::Tensor split_heads(const nn::Tensor& x, std::size_t heads) {
  const std::size_t b = x.dim(0), l = x.dim(1), d = x.dim(2), dk = d / heads;
  auto t = nn::permute(nn::reshape(x, {b, l, heads, dk}), {0, 2, 1, 3});
  return nn::reshape(t, {b * heads, l, dk});
}

// [B*h, L, dk] -> [B, L, h*dk]
nn::Tensor merge_heads(const nn::Tensor& x, std::size_t batch, std::size_t heads) {
  const std::size_t l = x.dim(1), dk = x.dim(2);
  auto t = nn::permute(nn::reshape(x, {batch, heads, l, dk}), {0, 2, 1, 3});
  return nn::reshape(t, {batch, l, heads * dk});
}

}  // namespace

nn::Tensor multi_head_attention(const nn::Tensor& query_in, const nn::Tensor& kv_in,
                                const AttentionParams& params, std::size_t heads,
                                const nn::BoolTensor* mask, ForwardContext& ctx,
                                const char* site) {
  const std::size_t batch = query_in.dim(0), lq = query_in.dim(1), lk = kv_in.dim(1);
  if (kv_in.dim(0) != batch) {
    throw nn::DimensionError(std::string(site) + ": query batch " + std::to_string(batch) +
                             " vs key batch " + std::to_string(kv_in.dim(0)));
  }
  auto q = split_heads(nn::linear(query_in, params.w_q), heads);
  auto k = split_heads(nn::linear(kv_in, params.w_k), heads);
  auto v = split_heads(nn::linear(kv_in, params.w_v), heads);

  nn::BoolTensor expanded;
  if (mask) {
    if (mask->shape != nn::Shape{batch, lq, lk}) {
      throw nn::DimensionError(std::string(site) + ": mask " + nn::shape_to_string(mask->shape) +
                               " for attention " + std::to_string(batch) + "x" +
                               std::to_string(lq) + "x" + std::to_string(lk));
    }
    expanded = nn::BoolTensor({batch * heads, lq, lk}, false);
    const std::size_t block = lq * lk;
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t h = 0; h < heads; ++h)
        std::copy_n(mask->values.begin() + static_cast<long>(b * block), block,
                    expanded.values.begin() + static_cast<long>((b * heads + h) * block));
  }
  auto att = nn::scaled_dot_product_attention(q, k, v, mask ? &expanded : nullptr);
  ctx.empty_attention_rows += att.empty_rows / heads;
  if (ctx.attention_log) ctx.attention_log->push_back({site, att.weights, expanded});
  return nn::linear(merge_heads(att.output, batch, heads), params.w_o);
}

nn::Tensor add_and_norm(const nn::Tensor& x, const nn::Tensor& sublayer_out,
                        const LayerNormParams& norm, const ModelConfig& config,
                        ForwardContext& ctx) {
  auto residual = nn::add(x, ctx.dropout(sublayer_out, config.dropout));
  return nn::layer_norm(residual, norm.gain, norm.bias, config.layer_norm_eps);
}

nn::Tensor feed_forward(const nn::Tensor& x, const FeedForwardParams& params, bool causal) {
  switch (params.kind) {
    case FeedForwardKind::SeparableConv: {
      const std::size_t k = params.depthwise.dim(0);
      const auto padding =
          causal ? nn::TemporalPadding::causal(k) : nn::TemporalPadding::symmetric(k);
      return nn::separable_conv(x, params.depthwise, params.pointwise, padding);
    }
    case FeedForwardKind::Dense:
      return nn::linear(nn::relu(nn::linear(x, params.w1, params.b1)), params.w2, params.b2);
    case FeedForwardKind::None:
      break;
  }
  throw std::logic_error("feed_forward called on a removed sub-layer");
}

}  // namespace trajformer::model
