#include <gtest/gtest.h>

#include <cmath>

#include "trajformer/data/synth.hpp"
#include "trajformer/graph/st_graph.hpp"

using namespace trajformer;

namespace {

data::Scene fixed_scene(std::vector<data::Point2> starts) {
  std::vector<data::SynthTrack> tracks;
  for (auto p : starts) tracks.push_back(data::constant_velocity_track(p, {0.5, 0.0}, 12));
  return data::scene_from_tracks(tracks);
}

std::size_t count_spatial(const graph::STGraph& g, std::size_t t) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < g.node_count; ++i)
    for (std::size_t j = 0; j < g.node_count; ++j) c += g.spatial(t, i, j);
  return c;
}

}  // namespace

TEST(Graph, ThreePresentAgentsFullyConnected) {
  const auto g = graph::build_graph(fixed_scene({{0, 0}, {1, 0}, {2, 0}}));
  EXPECT_EQ(g.node_count, 3u);
  EXPECT_EQ(g.frame_count, 6u);
  for (std::size_t t = 0; t < 6; ++t) EXPECT_EQ(count_spatial(g, t), 9u);
}

TEST(Graph, DistantPairWithLimitKeepsSelfEdgesOnly) {
  const auto g = graph::build_graph(fixed_scene({{0, 0}, {20, 0}}), 15.0);
  for (std::size_t t = 0; t < 6; ++t) {
    EXPECT_TRUE(g.spatial(t, 0, 0));
    EXPECT_TRUE(g.spatial(t, 1, 1));
    EXPECT_FALSE(g.spatial(t, 0, 1));
    EXPECT_FALSE(g.spatial(t, 1, 0));
  }
  const auto wide = graph::build_graph(fixed_scene({{0, 0}, {20, 0}}), 25.0);
  EXPECT_TRUE(wide.spatial(0, 0, 1));
}

TEST(Graph, AbsentAgentHasNoEdges) {
  auto scene = fixed_scene({{0, 0}, {1, 0}, {2, 0}});
  scene.set_present(2, 1, false);
  const auto g = graph::build_graph(scene);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_FALSE(g.spatial(2, 1, j));
    EXPECT_FALSE(g.spatial(2, j, 1));
  }
  EXPECT_FALSE(g.present(2, 1));
  EXPECT_TRUE(g.present(3, 1));
  for (std::size_t t = 0; t < 6; ++t) {
    EXPECT_FALSE(g.temporal(1, t, 2));
    EXPECT_FALSE(g.temporal(1, 2, t));
  }
  EXPECT_TRUE(g.temporal(1, 0, 5));
}

TEST(Graph, NegativeLimitRejected) {
  EXPECT_THROW(graph::build_graph(fixed_scene({{0, 0}}), -1.0), std::invalid_argument);
}

TEST(Graph, InvariantsOnRandomScenes) {
  nn::Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    auto scene = data::synth_scene(trial % 2 ? data::SynthKind::Crossing : data::SynthKind::Turn, rng);
    std::bernoulli_distribution drop(0.2);
    for (std::size_t t = 0; t + 1 < scene.t_obs; ++t)
      for (std::size_t i = 0; i < scene.num_agents(); ++i)
        if (drop(rng)) scene.set_present(t, i, false);
    const std::optional<double> limit =
        trial % 3 ? std::optional<double>(std::uniform_real_distribution<double>(0, 20)(rng))
                  : std::nullopt;
    const auto g = graph::build_graph(scene, limit);
    const std::size_t n = g.node_count;
    for (std::size_t t = 0; t < g.frame_count; ++t) {
      std::size_t present = 0;
      for (std::size_t i = 0; i < n; ++i) present += g.present(t, i);
      // Without a limit every present pair is connected.
      if (!limit) EXPECT_EQ(count_spatial(g, t), present * present);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_EQ(g.spatial(t, i, i), g.present(t, i));
        for (std::size_t j = 0; j < n; ++j) {
          EXPECT_EQ(g.spatial(t, i, j), g.spatial(t, j, i));
          if (g.spatial(t, i, j)) EXPECT_TRUE(g.present(t, i) && g.present(t, j));
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < g.frame_count; ++t)
        for (std::size_t t1 = 0; t1 < g.frame_count; ++t1)
          EXPECT_EQ(g.temporal(i, t, t1), g.present(t, i) && g.present(t1, i));
  }
}

TEST(Graph, MergeIsBlockDiagonal) {
  const auto a = graph::build_graph(fixed_scene({{0, 0}, {1, 0}}));
  const auto b = graph::build_graph(fixed_scene({{0, 0}, {1, 0}, {2, 0}}));
  const std::vector<graph::STGraph> parts{a, b};
  const auto m = graph::merge_graphs(parts);
  EXPECT_EQ(m.node_count, 5u);
  for (std::size_t t = 0; t < 6; ++t) {
    EXPECT_EQ(count_spatial(m, t), 4u + 9u);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 2; j < 5; ++j) {
        EXPECT_FALSE(m.spatial(t, i, j));
        EXPECT_FALSE(m.spatial(t, j, i));
      }
  }
  EXPECT_TRUE(m.temporal(4, 0, 5));
}

TEST(Graph, MergeRejectsFrameMismatch) {
  auto g1 = graph::build_graph(fixed_scene({{0, 0}}));
  auto g2 = g1;
  g2.frame_count = 5;
  const std::vector<graph::STGraph> parts{g1, g2};
  EXPECT_THROW(graph::merge_graphs(parts), std::invalid_argument);
  EXPECT_THROW(graph::merge_graphs({}), std::invalid_argument);
}
