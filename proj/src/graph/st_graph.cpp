#include "trajformer/graph/st_graph.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace trajformer::graph {

STGraph build_graph(const data::Scene& scene, std::optional<double> spatial_limit) {
  if (spatial_limit && !(*spatial_limit >= 0.0)) {
    throw std::invalid_argument("spatial limit must be non-negative, got " +
                                std::to_string(*spatial_limit));
  }
  const std::size_t n = scene.num_agents();
  const std::size_t t_len = scene.t_obs;
  STGraph g;
  g.node_count = n;
  g.frame_count = t_len;
  g.padding_mask = nn::BoolTensor({t_len, n}, false);
  g.spatial_mask = nn::BoolTensor({t_len, n, n}, false);
  g.temporal_mask = nn::BoolTensor({n, t_len, t_len}, false);

  for (std::size_t t = 0; t < t_len; ++t)
    for (std::size_t i = 0; i < n; ++i) g.padding_mask.values[t * n + i] = scene.present(t, i);

  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!scene.present(t, i)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!scene.present(t, j)) continue;
        bool admit = true;
        if (spatial_limit && i != j) {
          const double dx = scene.hist(t, i, data::kX) - scene.hist(t, j, data::kX);
          const double dy = scene.hist(t, i, data::kY) - scene.hist(t, j, data::kY);
          admit = std::hypot(dx, dy) <= *spatial_limit;
        }
        g.spatial_mask.values[(t * n + i) * n + j] = admit;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < t_len; ++t)
      for (std::size_t t1 = 0; t1 < t_len; ++t1)
        g.temporal_mask.values[(i * t_len + t) * t_len + t1] =
            scene.present(t, i) && scene.present(t1, i);
  return g;
}

STGraph merge_graphs(std::span<const STGraph> graphs) {
  if (graphs.empty()) throw std::invalid_argument("merge_graphs: no graphs");
  const std::size_t t_len = graphs[0].frame_count;
  std::size_t total = 0;
  for (const auto& g : graphs) {
    if (g.frame_count != t_len) throw std::invalid_argument("merge_graphs: frame counts differ");
    total += g.node_count;
  }
  STGraph out;
  out.node_count = total;
  out.frame_count = t_len;
  out.padding_mask = nn::BoolTensor({t_len, total}, false);
  out.spatial_mask = nn::BoolTensor({t_len, total, total}, false);
  out.temporal_mask = nn::BoolTensor({total, t_len, t_len}, false);
  std::size_t offset = 0;
  for (const auto& g : graphs) {
    const std::size_t n = g.node_count;
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        out.padding_mask.values[t * total + offset + i] = g.padding_mask.values[t * n + i];
        for (std::size_t j = 0; j < n; ++j)
          out.spatial_mask.values[(t * total + offset + i) * total + offset + j] =
              g.spatial_mask.values[(t * n + i) * n + j];
      }
    }
    std::copy(g.temporal_mask.values.begin(), g.temporal_mask.values.end(),
              out.temporal_mask.values.begin() + static_cast<long>(offset * t_len * t_len));
    offset += n;
  }
  return out;
}

}  // namespace trajformer::graph
