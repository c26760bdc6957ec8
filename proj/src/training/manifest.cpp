#include "trajformer/training/manifest.hpp"

#include <openssl/sha.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace trajformer::training {

std::string config_text(const std::vector<std::pair<std::string, std::string>>& config) {
  std::string out;
  for (const auto& [k, v] : config) out += k + "=" + v + "\n";
  return out;
}

std::string git_blob_hash(std::string_view content) {
  std::string object = "blob " + std::to_string(content.size());
  object.push_back('\0');
  object.append(content);
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(object.data()), object.size(), digest);
  std::string hex;
  char buf[3];
  for (unsigned char byte : digest) {
    std::snprintf(buf, sizeof(buf), "%02x", byte);
    hex += buf;
  }
  return hex;
}

void write_manifest(const std::filesystem::path& dir, RunManifest manifest) {
  std::filesystem::create_directories(dir);
  write_manifest_file(dir / kManifestFile, std::move(manifest));
}

void write_manifest_file(const std::filesystem::path& path, RunManifest manifest) {
  manifest.config_hash = git_blob_hash(config_text(manifest.config));
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  j["seed"] = manifest.seed;
  j["config_hash"] = manifest.config_hash;
  j["datasets"] = manifest.datasets;
  j["checkpoint"] = manifest.checkpoint;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [k, v] : manifest.config) config[k] = v;
  j["config"] = config;

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out.flush()) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RunManifest read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestFile;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto j = nlohmann::ordered_json::parse(in);
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.datasets = j.at("datasets").get<std::vector<std::string>>();
  m.checkpoint = j.at("checkpoint").get<std::string>();
  for (const auto& [k, v] : j.at("config").items()) m.config.emplace_back(k, v.get<std::string>());
  return m;
}

}  // namespace trajformer::training
