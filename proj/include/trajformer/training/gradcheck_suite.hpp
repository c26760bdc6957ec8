#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajformer/data/scene.hpp"
#include "trajformer/model/config.hpp"

namespace trajformer::training {

inline constexpr double kPrimitiveTolerance = 1e-4;
inline constexpr double kModelTolerance = 1e-3;

struct GradCheckEntry {
  std::string name;
  bool primitive = true;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t elements = 0;
  double tolerance = 0.0;
  bool passed() const { return max_rel_error < tolerance; }
};

/// d_model=8, two heads, one layer of each stack, kernels of 3, no dropout.
model::ModelConfig gradcheck_model_config(model::FeedForwardKind ff = model::FeedForwardKind::SeparableConv);
/// Three agents over 6+6 frames, one of them missing its first observation.
data::Scene gradcheck_scene();

/// Every differentiable operation the model uses, on random inputs.
std::vector<GradCheckEntry> check_primitives(std::uint64_t seed);
/// Parameter groups (name prefixes such as "st.0.spatial") of a full model
/// trained with the l2 loss under teacher forcing.
std::vector<GradCheckEntry> check_model(const model::ModelConfig& config, std::uint64_t seed,
                                        const std::string& label = "model");
/// Primitives, then the separable-conv and dense model variants.
std::vector<GradCheckEntry> run_gradcheck_suite(std::uint64_t seed = 7);

}  // namespace trajformer::training
