#pragma once

#include <string>
#include <vector>

#include "trajformer/data/scene.hpp"

namespace trajformer::data {

enum class FeatureSet {
  // x, y, length, width, cos(heading), sin(heading), one-hot category (5)
  All,
  // x, y only
  Coordinates,
  // x, y, length, width, heading, category as a scalar
  Raw,
};

std::size_t feature_width(FeatureSet set);
const char* feature_set_name(FeatureSet set);
FeatureSet parse_feature_set(const std::string& name);

/// Model input of shape [t_obs][N][feature_width]; absent slots are zero.
std::vector<double> encode_features(const Scene& scene, FeatureSet set);

}  // namespace trajformer::data
