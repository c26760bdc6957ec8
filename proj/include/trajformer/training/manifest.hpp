#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trajformer::training {

/// Record of what produced the artifacts in a run directory.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;  // resolved, in key order
  std::uint64_t seed = 0;
  std::vector<std::string> datasets;
  std::string checkpoint;
  std::string config_hash;  // blob hash of config_text(config)
};

/// "key=value\n" per entry.
std::string config_text(const std::vector<std::pair<std::string, std::string>>& config);
/// SHA-1 of "blob <size>\0<content>", hex encoded, as git computes object ids.
std::string git_blob_hash(std::string_view content);

inline constexpr const char* kManifestFile = "manifest.json";

/// Writes <dir>/manifest.json atomically; fills config_hash.
void write_manifest(const std::filesystem::path& dir, RunManifest manifest);
void write_manifest_file(const std::filesystem::path& path, RunManifest manifest);
RunManifest read_manifest(const std::filesystem::path& dir);

}  // namespace trajformer::training
