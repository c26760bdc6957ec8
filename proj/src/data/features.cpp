#include "trajformer/data/features.hpp"

#include <cmath>
#include <stdexcept>

namespace trajformer::data {

std::size_t feature_width(FeatureSet set) {
  switch (set) {
    case FeatureSet::All: return 6 + kCategoryCount;
    case FeatureSet::Coordinates: return 2;
    case FeatureSet::Raw: return 6;
  }
  return 0;
}

const char* feature_set_name(FeatureSet set) {
  switch (set) {
    case FeatureSet::All: return "all";
    case FeatureSet::Coordinates: return "coords";
    case FeatureSet::Raw: return "raw";
  }
  return "all";
}

FeatureSet parse_feature_set(const std::string& name) {
  if (name == "all" || name == "A") return FeatureSet::All;
  if (name == "coords" || name == "C") return FeatureSet::Coordinates;
  if (name == "raw") return FeatureSet::Raw;
  throw std::invalid_argument("unknown feature set '" + name + "' (expected all, coords, raw)");
}

std::vector<double> encode_features(const Scene& scene, FeatureSet set) {
  const std::size_t n = scene.num_agents();
  const std::size_t width = feature_width(set);
  std::vector<double> out(scene.t_obs * n * width, 0.0);
  for (std::size_t t = 0; t < scene.t_obs; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!scene.present(t, i)) continue;
      double* f = out.data() + (t * n + i) * width;
      f[0] = scene.hist(t, i, kX);
      f[1] = scene.hist(t, i, kY);
      if (set == FeatureSet::Coordinates) continue;
      f[2] = scene.hist(t, i, kLength);
      f[3] = scene.hist(t, i, kWidth);
      const double heading = scene.hist(t, i, kHeading);
      const int category = static_cast<int>(scene.agents[i].category);
      if (set == FeatureSet::Raw) {
        f[4] = heading;
        f[5] = static_cast<double>(category);
        continue;
      }
      f[4] = std::cos(heading);
      f[5] = std::sin(heading);
      f[6 + static_cast<std::size_t>(category - 1)] = 1.0;
    }
  }
  return out;
}

}  // namespace trajformer::data
