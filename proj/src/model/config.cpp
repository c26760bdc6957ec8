#include "trajformer/model/config.hpp"

#include <charconv>
#include <stdexcept>

#include "trajformer/data/trajectory_io.hpp"

namespace trajformer::model {

const char* feed_forward_name(FeedForwardKind kind) {
  switch (kind) {
    case FeedForwardKind::SeparableConv: return "sc";
    case FeedForwardKind::Dense: return "fc";
    case FeedForwardKind::None: return "off";
  }
  return "sc";
}

FeedForwardKind parse_feed_forward(const std::string& name) {
  if (name == "sc" || name == "SC") return FeedForwardKind::SeparableConv;
  if (name == "fc" || name == "FC") return FeedForwardKind::Dense;
  if (name == "off" || name == "none") return FeedForwardKind::None;
  throw std::invalid_argument("unknown sub-layer kind '" + name + "' (expected sc, fc, off)");
}

void ModelConfig::validate() const {
  if (d_model == 0 || heads == 0 || d_model % heads != 0) {
    throw std::invalid_argument("d_model (" + std::to_string(d_model) +
                                ") must be a positive multiple of heads (" +
                                std::to_string(heads) + ")");
  }
  if (tcn_kernel % 2 == 0 || tcn_kernel == 0) {
    throw std::invalid_argument("tcn_kernel must be odd, got " + std::to_string(tcn_kernel));
  }
  if (sep_kernel % 2 == 0 || sep_kernel == 0) {
    throw std::invalid_argument("sep_kernel must be odd, got " + std::to_string(sep_kernel));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("dropout must lie in [0, 1)");
  }
  if (t_obs == 0 || t_pred == 0) throw std::invalid_argument("t_obs and t_pred must be positive");
  if (decoder_ff == FeedForwardKind::None) {
    throw std::invalid_argument("the decoder sub-layer cannot be removed (td must be sc or fc)");
  }
  if (td_layers == 0) throw std::invalid_argument("td_layers must be at least 1");
  if (spatial_limit && *spatial_limit < 0.0) {
    throw std::invalid_argument("spatial_limit must be non-negative");
  }
  if (ff_hidden == 0) throw std::invalid_argument("ff_hidden must be positive");
}

bool parse_bool(const std::string& value) {
  if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
  if (value == "off" || value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("expected a boolean (on/off), got '" + value + "'");
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument("key '" + key + "' expects a non-negative integer, got '" + value +
                                "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument("key '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> to_key_values(const ModelConfig& c) {
  using data::format_double;
  return {
      {"d_model", std::to_string(c.d_model)},
      {"heads", std::to_string(c.heads)},
      {"st_layers", std::to_string(c.st_layers)},
      {"te_layers", std::to_string(c.te_layers)},
      {"td_layers", std::to_string(c.td_layers)},
      {"tcn_kernel", std::to_string(c.tcn_kernel)},
      {"sep_kernel", std::to_string(c.sep_kernel)},
      {"ff_hidden", std::to_string(c.ff_hidden)},
      {"dropout", format_double(c.dropout)},
      {"layer_norm_eps", format_double(c.layer_norm_eps)},
      {"t_obs", std::to_string(c.t_obs)},
      {"t_pred", std::to_string(c.t_pred)},
      {"features", data::feature_set_name(c.features)},
      {"ss", c.spatial_attention ? "on" : "off"},
      {"tcn", c.tcn ? "on" : "off"},
      {"norm_after_spatial", c.norm_after_spatial ? "on" : "off"},
      {"te", feed_forward_name(c.temporal_encoder)},
      {"td", feed_forward_name(c.decoder_ff)},
      {"spatial_limit", c.spatial_limit ? format_double(*c.spatial_limit) : "none"},
  };
}

std::vector<std::string> model_config_keys() {
  std::vector<std::string> keys;
  for (auto& [k, v] : to_key_values(ModelConfig{})) keys.push_back(k);
  return keys;
}

bool apply_key_value(ModelConfig& c, const std::string& key, const std::string& value) {
  if (key == "d_model") c.d_model = parse_size(key, value);
  else if (key == "heads") c.heads = parse_size(key, value);
  else if (key == "st_layers") c.st_layers = parse_size(key, value);
  else if (key == "te_layers") c.te_layers = parse_size(key, value);
  else if (key == "td_layers") c.td_layers = parse_size(key, value);
  else if (key == "layers") c.st_layers = c.te_layers = c.td_layers = parse_size(key, value);
  else if (key == "tcn_kernel") c.tcn_kernel = parse_size(key, value);
  else if (key == "sep_kernel") c.sep_kernel = parse_size(key, value);
  else if (key == "ff_hidden") c.ff_hidden = parse_size(key, value);
  else if (key == "dropout") c.dropout = parse_real(key, value);
  else if (key == "layer_norm_eps") c.layer_norm_eps = parse_real(key, value);
  else if (key == "t_obs") c.t_obs = parse_size(key, value);
  else if (key == "t_pred") c.t_pred = parse_size(key, value);
  else if (key == "features") c.features = data::parse_feature_set(value);
  else if (key == "ss") c.spatial_attention = parse_bool(value);
  else if (key == "tcn") c.tcn = parse_bool(value);
  else if (key == "norm_after_spatial") c.norm_after_spatial = parse_bool(value);
  else if (key == "te") c.temporal_encoder = parse_feed_forward(value);
  else if (key == "td") c.decoder_ff = parse_feed_forward(value);
  else if (key == "spatial_limit") {
    if (value == "none" || value == "W" || value == "off") c.spatial_limit.reset();
    else if (value == "N") c.spatial_limit = 15.0;
    else c.spatial_limit = parse_real(key, value);
  } else {
    return false;
  }
  return true;
}

}  // namespace trajformer::model
