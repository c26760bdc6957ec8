#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajformer/model/config.hpp"

namespace trajformer::training {

/// Bad key, bad value or inconsistent combination.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TrainConfig {
  model::ModelConfig model;
  std::size_t warmup_steps = 5000;
  std::size_t batch_size = 8;
  std::size_t max_steps = 20000;
  std::uint64_t seed = 1;
  bool augment = true;
  std::optional<double> clip_norm;  // global-norm gradient clipping, off by default
  std::size_t log_interval = 100;
  std::size_t eval_interval = 500;
  std::size_t checkpoint_interval = 1000;
  std::size_t stride = 1;  // window stride when reading datasets
  std::string train_data;
  std::string val_data;
  // Last ablation preset applied (1-8), 0 for none.
  int ablation_row = 0;

  /// Throws ConfigError.
  void validate() const;
};

std::vector<std::string> train_config_keys();
/// Every key with its resolved value, model keys first.
std::vector<std::pair<std::string, std::string>> to_key_values(const TrainConfig& config);

/// Applies one setting. Unknown keys raise ConfigError naming the closest
/// valid key.
void apply_setting(TrainConfig& config, const std::string& key, const std::string& value);
/// Parses "key=value"; whitespace around both parts is ignored.
void apply_assignment(TrainConfig& config, const std::string& assignment);

/// key=value lines; '#' starts a comment.
void read_config(TrainConfig& config, std::istream& in, const std::string& source = "config");
TrainConfig load_train_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const TrainConfig& config);

/// Component flags of ablation rows 1-8; row 8 is the full model.
std::vector<std::pair<std::string, std::string>> ablation_row_settings(int row);

std::size_t edit_distance(const std::string& a, const std::string& b);
std::string nearest_key(const std::string& key, std::span<const std::string> candidates);

}  // namespace trajformer::training
