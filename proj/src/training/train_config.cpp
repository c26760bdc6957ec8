#include "trajformer/training/train_config.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "trajformer/data/trajectory_io.hpp"

namespace trajformer::training {

namespace {

const std::vector<std::string>& run_keys() {
  static const std::vector<std::string> keys = {
      "warmup_steps", "batch_size", "max_steps", "seed", "augment", "clip",
      "log_interval", "eval_interval", "checkpoint_interval", "stride", "train_data", "val_data", "ablation_row"};
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void TrainConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (warmup_steps < 1) throw ConfigError("warmup_steps must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (stride < 1) throw ConfigError("stride must be at least 1");
  if (clip_norm && !(*clip_norm > 0.0)) throw ConfigError("clip must be positive or off");
}

std::vector<std::string> train_config_keys() {
  auto keys = model::model_config_keys();
  keys.push_back("layers");
  keys.insert(keys.end(), run_keys().begin(), run_keys().end());
  return keys;
}

std::vector<std::pair<std::string, std::string>> to_key_values(const TrainConfig& c) {
  auto kv = model::to_key_values(c.model);
  kv.emplace_back("warmup_steps", std::to_string(c.warmup_steps));
  kv.emplace_back("batch_size", std::to_string(c.batch_size));
  kv.emplace_back("max_steps", std::to_string(c.max_steps));
  kv.emplace_back("seed", std::to_string(c.seed));
  kv.emplace_back("augment", c.augment ? "on" : "off");
  kv.emplace_back("clip", c.clip_norm ? data::format_double(*c.clip_norm) : "off");
  kv.emplace_back("log_interval", std::to_string(c.log_interval));
  kv.emplace_back("eval_interval", std::to_string(c.eval_interval));
  kv.emplace_back("checkpoint_interval", std::to_string(c.checkpoint_interval));
  kv.emplace_back("stride", std::to_string(c.stride));
  kv.emplace_back("train_data", c.train_data);
  kv.emplace_back("val_data", c.val_data);
  kv.emplace_back("ablation_row", c.ablation_row ? std::to_string(c.ablation_row) : "none");
  return kv;
}

std::vector<std::pair<std::string, std::string>> ablation_row_settings(int row) {
  // ss, tcn, te, td, features, spatial_limit
  static const char* rows[8][6] = {
      {"off", "off", "sc", "sc", "all", "none"}, {"off", "on", "sc", "sc", "all", "none"},
      {"on", "off", "sc", "sc", "all", "none"},  {"on", "on", "off", "sc", "all", "none"},
      {"on", "on", "fc", "fc", "all", "none"},   {"on", "on", "sc", "sc", "coords", "none"},
      {"on", "on", "sc", "sc", "all", "N"},      {"on", "on", "sc", "sc", "all", "none"},
  };
  if (row < 1 || row > 8) {
    throw ConfigError("ablation_row must be between 1 and 8, got " + std::to_string(row));
  }
  const auto& r = rows[row - 1];
  return {{"ss", r[0]}, {"tcn", r[1]}, {"te", r[2]}, {"td", r[3]}, {"features", r[4]},
          {"spatial_limit", r[5]}};
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string nearest_key(const std::string& key, std::span<const std::string> candidates) {
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto& c : candidates) {
    const auto d = edit_distance(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

void apply_setting(TrainConfig& c, const std::string& key, const std::string& value) {
  try {
    if (model::apply_key_value(c.model, key, value)) return;
    if (key == "warmup_steps") c.warmup_steps = model::parse_size(key, value);
    else if (key == "batch_size") c.batch_size = model::parse_size(key, value);
    else if (key == "max_steps") c.max_steps = model::parse_size(key, value);
    else if (key == "seed") c.seed = model::parse_size(key, value);
    else if (key == "augment") c.augment = model::parse_bool(value);
    else if (key == "clip") {
      if (value == "off" || value == "none") c.clip_norm.reset();
      else if (value == "on") c.clip_norm = 5.0;
      else c.clip_norm = model::parse_real(key, value);
    } else if (key == "log_interval") c.log_interval = model::parse_size(key, value);
    else if (key == "eval_interval") c.eval_interval = model::parse_size(key, value);
    else if (key == "checkpoint_interval") c.checkpoint_interval = model::parse_size(key, value);
    else if (key == "stride") c.stride = model::parse_size(key, value);
    else if (key == "train_data") c.train_data = value;
    else if (key == "val_data") c.val_data = value;
    else if (key == "ablation_row") {
      if (value == "none") {
        c.ablation_row = 0;
      } else {
        const auto row = model::parse_size(key, value);
        for (const auto& [k, v] : ablation_row_settings(static_cast<int>(row)))
          model::apply_key_value(c.model, k, v);
        c.ablation_row = static_cast<int>(row);
      }
    }
    else {
      const auto keys = train_config_keys();
      throw ConfigError("unknown configuration key '" + key + "' (did you mean '" +
                        nearest_key(key, keys) + "'?)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(e.what()) + " [key '" + key + "']");
  }
}

void apply_assignment(TrainConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("expected key=value, got '" + assignment + "'");
  }
  apply_setting(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void read_config(TrainConfig& config, std::istream& in, const std::string& source) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_assignment(config, line);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  TrainConfig config;
  read_config(config, in, path.string());
  return config;
}

void write_config(std::ostream& out, const TrainConfig& config) {
  for (const auto& [k, v] : to_key_values(config)) out << k << '=' << v << '\n';
}

}  // namespace trajformer::training
