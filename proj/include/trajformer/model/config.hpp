#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trajformer/data/features.hpp"

namespace trajformer::model {

/// Position-wise sub-layer used by the temporal encoder and decoder.
enum class FeedForwardKind {
  SeparableConv,  // depthwise temporal + pointwise
  Dense,          // two fully connected layers with ReLU
  None,           // layer removed (temporal encoder only)
};

const char* feed_forward_name(FeedForwardKind kind);
FeedForwardKind parse_feed_forward(const std::string& name);

struct ModelConfig {
  std::size_t d_model = 32;
  std::size_t heads = 8;
  std::size_t st_layers = 6;
  std::size_t te_layers = 6;
  std::size_t td_layers = 6;
  std::size_t tcn_kernel = 3;
  std::size_t sep_kernel = 3;
  std::size_t ff_hidden = 128;
  double dropout = 0.1;
  double layer_norm_eps = 1e-5;
  std::size_t t_obs = 6;
  std::size_t t_pred = 6;

  data::FeatureSet features = data::FeatureSet::All;
  bool spatial_attention = true;
  bool tcn = true;
  bool norm_after_spatial = true;
  FeedForwardKind temporal_encoder = FeedForwardKind::SeparableConv;
  FeedForwardKind decoder_ff = FeedForwardKind::SeparableConv;
  std::optional<double> spatial_limit;

  std::size_t input_width() const { return data::feature_width(features); }
  std::size_t head_dim() const { return d_model / heads; }
  bool has_temporal_encoder() const { return temporal_encoder != FeedForwardKind::None; }

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

/// Ordered key=value view used by config files, manifests and checkpoints.
std::vector<std::pair<std::string, std::string>> to_key_values(const ModelConfig& config);
/// Returns false when `key` is not a model key; throws on a bad value.
bool apply_key_value(ModelConfig& config, const std::string& key, const std::string& value);
std::vector<std::string> model_config_keys();

bool parse_bool(const std::string& value);
std::size_t parse_size(const std::string& key, const std::string& value);
double parse_real(const std::string& key, const std::string& value);

}  // namespace trajformer::model
