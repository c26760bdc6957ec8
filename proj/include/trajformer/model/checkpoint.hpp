#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajformer/model/params.hpp"

namespace trajformer::model {

// Binary layout, all integers and values little-endian:
//   "TRJCKPT\0"          8-byte magic
//   u32 version          kCheckpointVersion
//   u32 + bytes          metadata text (key=value lines)
//   u32 count            number of arrays
//   count x { u32 + bytes name, u32 rank, u64 dims[rank], u64 offset }
//   f64 values           concatenated; offset counts values from here
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  nn::Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  std::string metadata;
  std::vector<NamedArray> arrays;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const std::string& metadata,
                     const ParamStore& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies arrays into matching parameters; names and shapes must agree exactly.
void assign_parameters(ParamStore& params, const Checkpoint& checkpoint);

}  // namespace trajformer::model
