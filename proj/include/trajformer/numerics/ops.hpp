#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "trajformer/numerics/tensor.hpp"

namespace trajformer::nn {

using Rng = std::mt19937_64;

/// Dense boolean array; true marks an admissible entry.
struct BoolTensor {
  Shape shape;
  std::vector<std::uint8_t> values;

  BoolTensor() = default;
  BoolTensor(Shape s, bool fill) : shape(std::move(s)), values(shape_numel(shape), fill ? 1 : 0) {}
  std::size_t numel() const { return values.size(); }
};

// Elementwise; operands must share a shape.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor relu(const Tensor& x);

/// x[..., C] + bias[C]
Tensor add_bias(const Tensor& x, const Tensor& bias);

/// Multiplies every element by a constant 0/1 mask of the same shape.
Tensor apply_mask(const Tensor& x, std::span<const std::uint8_t> keep);

Tensor sum(const Tensor& x);

Tensor matmul(const Tensor& a, const Tensor& b);
/// [B,m,k] x [B,k,n] -> [B,m,n]
Tensor bmm(const Tensor& a, const Tensor& b);
/// x[..., in] * weight[in, out] (+ bias[out])
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias = Tensor());

Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& order);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor cumsum(const Tensor& x, std::size_t axis);

/// Max-subtracted softmax along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);

/// Normalizes over the last dimension, then applies gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

/// Zero padding applied before and after the time axis.
struct TemporalPadding {
  std::size_t before = 0;
  std::size_t after = 0;

  /// Centered window; rejects even kernels.
  static TemporalPadding symmetric(std::size_t kernel);
  /// Window ending at the current frame.
  static TemporalPadding causal(std::size_t kernel);
};

/// x[T,N,C] convolved with kernel[K,1,C,C'] along T only.
Tensor conv2d_temporal(const Tensor& x, const Tensor& kernel, TemporalPadding padding);

/// Per-channel temporal convolution; kernel[K,C].
Tensor depthwise_conv_temporal(const Tensor& x, const Tensor& kernel, TemporalPadding padding);

/// Depthwise kernel[K,C] followed by pointwise kernel[C,C'].
Tensor separable_conv(const Tensor& x, const Tensor& depthwise, const Tensor& pointwise,
                      TemporalPadding padding);

/// Inverted dropout. Identity when !training or p == 0.
Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);

/// Additive score bias for masked-out keys.
inline constexpr double kMaskedScore = -1e9;

struct AttentionOutput {
  Tensor output;   // [B, Lq, dv]
  Tensor weights;  // [B, Lq, Lk]
  std::size_t empty_rows = 0;  // queries with no admissible key; their output is zero
};

/// softmax(Q K^T / sqrt(d_k)) V over batched [B, L, d] operands.
/// `mask` (shape [B, Lq, Lk]) may be null for full attention.
AttentionOutput scaled_dot_product_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                                             const BoolTensor* mask = nullptr);

}  // namespace trajformer::nn
