#pragma once

#include <optional>
#include <span>

#include "trajformer/data/scene.hpp"
#include "trajformer/numerics/ops.hpp"

namespace trajformer::graph {

/// Attention masks over the agent-frame nodes of one observation window.
struct STGraph {
  std::size_t node_count = 0;   // N
  std::size_t frame_count = 0;  // T
  nn::BoolTensor spatial_mask;   // [T, N, N]: same-frame edges
  nn::BoolTensor temporal_mask;  // [N, T, T]: same-agent edges
  nn::BoolTensor padding_mask;   // [T, N]: observed slots

  bool spatial(std::size_t t, std::size_t i, std::size_t j) const {
    return spatial_mask.values[(t * node_count + i) * node_count + j] != 0;
  }
  bool temporal(std::size_t n, std::size_t t, std::size_t t1) const {
    return temporal_mask.values[(n * frame_count + t) * frame_count + t1] != 0;
  }
  bool present(std::size_t t, std::size_t n) const {
    return padding_mask.values[t * node_count + n] != 0;
  }
};

/// Whole-scene spatial edges between present agents, or only pairs within
/// `spatial_limit` metres at the same frame. Self-edges of present agents are
/// always admitted.
STGraph build_graph(const data::Scene& scene, std::optional<double> spatial_limit = std::nullopt);

/// Disjoint union: scenes laid side by side on the agent axis with no
/// spatial edges between them. All graphs must share T.
STGraph merge_graphs(std::span<const STGraph> graphs);

}  // namespace trajformer::graph
