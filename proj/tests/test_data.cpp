#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "test_support.hpp"
#include "trajformer/data/features.hpp"
#include "trajformer/data/scene.hpp"
#include "trajformer/data/synth.hpp"
#include "trajformer/data/trajectory_io.hpp"

using namespace trajformer;
using data::Point2;

namespace {

data::ParsedLog parse(const std::string& text) {
  std::istringstream in(text);
  return data::parse_trajectory_stream(in);
}

// One line per agent per frame, agents moving along x.
std::string recording(long first, long last, std::vector<long> ids) {
  std::ostringstream os;
  for (long f = first; f <= last; ++f)
    for (long id : ids)
      os << f << ' ' << id << " 3 " << (f * 0.5 + static_cast<double>(id)) << ' '
         << static_cast<double>(id) << " 0 0.6 0.6 1.7 0.0\n";
  return os.str();
}

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

TEST(Parse, SingleLineFields) {
  const auto log = parse("1 101 1 10.0 5.0 0.0 4.5 2.0 1.6 0.0\n");
  ASSERT_EQ(log.frames.size(), 1u);
  EXPECT_EQ(log.frames[0].frame_id, 1);
  ASSERT_EQ(log.frames[0].agents.size(), 1u);
  const auto& a = log.frames[0].agents[0];
  EXPECT_EQ(a.agent_id, 101);
  EXPECT_EQ(a.category, data::Category::SmallVehicle);
  EXPECT_EQ(a.x, 10.0);
  EXPECT_EQ(a.y, 5.0);
  EXPECT_EQ(a.length, 4.5);
  EXPECT_EQ(a.width, 2.0);
  EXPECT_EQ(a.heading, 0.0);
}

TEST(Parse, EmptyFileGivesNoScenes) {
  const auto log = parse("");
  EXPECT_TRUE(log.frames.empty());
  EXPECT_TRUE(data::build_scenes(log.frames).scenes.empty());
}

TEST(Parse, FramesSortedAscending) {
  const auto log = parse("5 1 1 0 0 0 1 1 1 0\n2 1 1 0 0 0 1 1 1 0\n3 1 1 0 0 0 1 1 1 0\n");
  ASSERT_EQ(log.frames.size(), 3u);
  EXPECT_EQ(log.frames[0].frame_id, 2);
  EXPECT_EQ(log.frames[1].frame_id, 3);
  EXPECT_EQ(log.frames[2].frame_id, 5);
}

TEST(Parse, MalformedLineReportsLineNumber) {
  try {
    parse("1 1 1 0 0 0 1 1 1 0\n1 2 1 zero 0 0 1 1 1 0\n");
    FAIL() << "expected a parse error";
  } catch (const data::ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  EXPECT_THROW(parse("1 1 1 0 0 0 1 1 1\n"), data::ParseError);
}

TEST(Parse, UnknownTypeMapsToOther) {
  const auto log = parse("1 7 9 0 0 0 1 1 1 0\n");
  EXPECT_EQ(log.frames[0].agents[0].category, data::Category::Other);
  EXPECT_EQ(log.unknown_type_count, 1u);
}

TEST(Parse, WriteThenReadRoundTrips) {
  const auto log = parse(recording(1, 3, {4, 9}));
  std::ostringstream out;
  data::write_trajectory_stream(out, log.frames);
  const auto again = parse(out.str());
  ASSERT_EQ(again.frames.size(), log.frames.size());
  for (std::size_t f = 0; f < log.frames.size(); ++f)
    for (std::size_t i = 0; i < log.frames[f].agents.size(); ++i) {
      EXPECT_EQ(again.frames[f].agents[i].x, log.frames[f].agents[i].x);
      EXPECT_EQ(again.frames[f].agents[i].y, log.frames[f].agents[i].y);
    }
}

TEST(Windows, TwelveFramesOnePersistentAgent) {
  const auto split = data::build_scenes(parse(recording(1, 12, {1})).frames);
  ASSERT_EQ(split.scenes.size(), 1u);
  EXPECT_EQ(split.scenes[0].num_agents(), 1u);
}

TEST(Windows, ThreeAgentsFullMask) {
  const auto split = data::build_scenes(parse(recording(1, 12, {1, 2, 3})).frames);
  ASSERT_EQ(split.scenes.size(), 1u);
  const auto& s = split.scenes[0];
  EXPECT_EQ(s.num_agents(), 3u);
  for (auto p : s.presence) EXPECT_EQ(p, 1);
  EXPECT_EQ(s.t_obs, 6u);
  EXPECT_EQ(s.t_pred, 6u);
  EXPECT_EQ(s.frame_interval, 0.5);
}

TEST(Windows, TwentyFramesStrideOne) {
  EXPECT_EQ(data::build_scenes(parse(recording(1, 20, {1})).frames).scenes.size(), 9u);
}

TEST(Windows, CountFormulaOnGapFreeRecordings) {
  for (long frames = 0; frames <= 30; ++frames) {
    const auto log = frames ? parse(recording(1, frames, {1})) : parse("");
    const auto expected = static_cast<std::size_t>(std::max(0L, frames - 11));
    EXPECT_EQ(data::build_scenes(log.frames).scenes.size(), expected) << frames;
  }
}

TEST(Windows, ShortRunsAreCounted) {
  const auto split = data::build_scenes(parse(recording(1, 8, {1}) + recording(30, 41, {1})).frames);
  EXPECT_EQ(split.scenes.size(), 1u);
  EXPECT_EQ(split.discarded_runs, 1u);
}

TEST(Windows, LateArrivalIsMaskedInHistory) {
  // Agent 2 appears at frame 6, the last observed frame.
  const auto text = recording(1, 12, {1}) + recording(6, 12, {2});
  const auto split = data::build_scenes(parse(text).frames);
  ASSERT_EQ(split.scenes.size(), 1u);
  const auto& s = split.scenes[0];
  ASSERT_EQ(s.num_agents(), 2u);
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_FALSE(s.present(t, 1));
    for (std::size_t f = 0; f < data::kHistoryFields; ++f) EXPECT_EQ(s.hist(t, 1, f), 0.0);
  }
  for (std::size_t t = 5; t < 12; ++t) EXPECT_TRUE(s.present(t, 1));
}

TEST(Windows, AgentsAbsentAtLastObservedFrameExcluded) {
  const auto text = recording(1, 12, {1}) + recording(7, 12, {2}) + recording(1, 4, {3});
  const auto split = data::build_scenes(parse(text).frames);
  ASSERT_EQ(split.scenes.size(), 1u);
  ASSERT_EQ(split.scenes[0].num_agents(), 1u);
  EXPECT_EQ(split.scenes[0].agents[0].id, 1);
}

TEST(Windows, AgentSetEqualsAgentsAtLastObservedFrame) {
  const auto text = recording(1, 20, {1, 2}) + recording(3, 9, {5}) + recording(10, 20, {7});
  const auto log = parse(text);
  const auto split = data::build_scenes(log.frames);
  for (const auto& s : split.scenes) {
    const auto& anchor = log.frames[static_cast<std::size_t>(s.first_frame_id - 1 + 5)];
    std::vector<long> expected;
    for (const auto& a : anchor.agents) expected.push_back(a.agent_id);
    std::sort(expected.begin(), expected.end());
    std::vector<long> got;
    for (const auto& a : s.agents) got.push_back(a.id);
    EXPECT_EQ(got, expected);
    EXPECT_NO_THROW(s.validate());
  }
}

TEST(Windows, ObservedOnlyScenesHaveNoFuture) {
  const auto log = parse(recording(1, 6, {1, 2}));
  const auto split = data::build_observed_scenes(log.frames, 6, 6);
  ASSERT_EQ(split.scenes.size(), 1u);
  EXPECT_FALSE(split.scenes[0].has_future);
  EXPECT_EQ(split.scenes[0].t_pred, 6u);
}

TEST(Normalize, SingleAgentMovesToOrigin) {
  data::SynthTrack track;
  track.positions.assign(12, Point2{100.0, 200.0});
  const auto scene = data::scene_from_tracks(std::span(&track, 1));
  const auto n = data::normalize_scene(scene);
  for (std::size_t t = 0; t < 12; ++t) EXPECT_EQ(n.position(t, 0), (Point2{0.0, 0.0}));
  EXPECT_EQ(n.origin, (Point2{100.0, 200.0}));
}

TEST(Normalize, TwoAgentCentroid) {
  std::vector<data::SynthTrack> tracks(2);
  tracks[0].positions.assign(12, Point2{0.0, 0.0});
  tracks[1].positions.assign(12, Point2{2.0, 2.0});
  const auto n = data::normalize_scene(data::scene_from_tracks(tracks));
  EXPECT_EQ(n.origin, (Point2{1.0, 1.0}));
  EXPECT_EQ(n.position(3, 0), (Point2{-1.0, -1.0}));
  EXPECT_EQ(n.position(9, 1), (Point2{1.0, 1.0}));
  EXPECT_EQ(n.hist(0, 0, data::kLength), tracks[0].length);
}

TEST(Normalize, RoundTripIsBitExact) {
  // UTM-like magnitudes: every coordinate shares a binade with the centroid.
  nn::Rng rng(9);
  std::uniform_real_distribution<double> ux(300000.0, 500000.0), uy(4200000.0, 4400000.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<data::SynthTrack> tracks(3);
    for (auto& tr : tracks)
      for (int t = 0; t < 12; ++t) tr.positions.push_back({ux(rng), uy(rng)});
    const auto scene = data::scene_from_tracks(tracks);
    const auto back = data::denormalize_scene(data::normalize_scene(scene));
    EXPECT_EQ(back.history, scene.history);
    EXPECT_EQ(back.future, scene.future);
    EXPECT_EQ(back.origin, scene.origin);
  }
}

TEST(Normalize, RoundTripOnIntegerGrid) {
  nn::Rng rng(10);
  std::uniform_int_distribution<int> u(-500, 500);
  std::vector<data::SynthTrack> tracks(4);
  for (auto& tr : tracks)
    for (int t = 0; t < 12; ++t) tr.positions.push_back({double(u(rng)), double(u(rng))});
  const auto scene = data::scene_from_tracks(tracks);
  const auto back = data::denormalize_scene(data::normalize_scene(scene));
  EXPECT_EQ(back.history, scene.history);
  EXPECT_EQ(back.future, scene.future);
}

TEST(Features, HeadingPiSplitsToMinusOneZero) {
  auto track = data::constant_velocity_track({0, 0}, {1, 0}, 12);
  track.headings.assign(12, std::numbers::pi);
  const auto scene = data::scene_from_tracks(std::span(&track, 1));
  const auto f = data::encode_features(scene, data::FeatureSet::All);
  EXPECT_EQ(f[4], -1.0);
  EXPECT_NEAR(f[5], 0.0, 1e-15);
}

TEST(Features, PedestrianOneHot) {
  auto track = data::constant_velocity_track({0, 0}, {1, 0}, 12, data::Category::Pedestrian);
  const auto scene = data::scene_from_tracks(std::span(&track, 1));
  const auto f = data::encode_features(scene, data::FeatureSet::All);
  ASSERT_EQ(f.size(), 6u * 11u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(f[6 + k], k == 2 ? 1.0 : 0.0);
}

TEST(Features, CoordinatesOnlyWidth) {
  EXPECT_EQ(data::feature_width(data::FeatureSet::All), 11u);
  EXPECT_EQ(data::feature_width(data::FeatureSet::Coordinates), 2u);
  EXPECT_EQ(data::parse_feature_set("C"), data::FeatureSet::Coordinates);
  EXPECT_EQ(data::parse_feature_set("A"), data::FeatureSet::All);
  auto track = data::constant_velocity_track({3, 4}, {1, 0}, 12);
  const auto scene = data::scene_from_tracks(std::span(&track, 1));
  const auto f = data::encode_features(scene, data::FeatureSet::Coordinates);
  ASSERT_EQ(f.size(), 12u);
  EXPECT_EQ(f[0], 3.0);
  EXPECT_EQ(f[1], 4.0);
}

TEST(Features, MaskedSlotsAreZeroAndNothingIsNan) {
  nn::Rng rng(3);
  auto scene = data::synth_scene(data::SynthKind::Crossing, rng);
  scene.set_present(2, 1, false);
  const auto f = data::encode_features(scene, data::FeatureSet::All);
  const std::size_t n = scene.num_agents();
  for (double v : f) EXPECT_FALSE(std::isnan(v));
  for (std::size_t k = 0; k < 11; ++k) EXPECT_EQ(f[(2 * n + 1) * 11 + k], 0.0);
}

TEST(Rotation, ZeroAngleIsIdentity) {
  nn::Rng rng(4);
  const auto scene = data::synth_scene(data::SynthKind::Turn, rng);
  const auto r = data::rotate_scene(scene, 0.0);
  EXPECT_EQ(r.history, scene.history);
  EXPECT_EQ(r.future, scene.future);
}

TEST(Rotation, QuarterTurn) {
  auto track = data::constant_velocity_track({1, 0}, {0, 0}, 12);
  const auto scene = data::scene_from_tracks(std::span(&track, 1));
  const auto r = data::rotate_scene(scene, std::numbers::pi / 2);
  const auto p = r.position(0, 0);
  EXPECT_NEAR(p.x, 0.0, 1e-15);
  EXPECT_NEAR(p.y, 1.0, 1e-15);
}

TEST(Rotation, PreservesDistancesAndSpeeds) {
  nn::Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto scene = data::normalize_scene(data::synth_scene(data::SynthKind::Crossing, rng));
    const auto r = data::random_rotation(scene, rng);
    for (std::size_t t = 0; t < 12; ++t) {
      EXPECT_NEAR(dist(r.position(t, 0), r.position(t, 1)),
                  dist(scene.position(t, 0), scene.position(t, 1)), 1e-9);
      if (t > 0)
        for (std::size_t i = 0; i < 2; ++i)
          EXPECT_NEAR(dist(r.position(t, i), r.position(t - 1, i)),
                      dist(scene.position(t, i), scene.position(t - 1, i)), 1e-9);
    }
    for (std::size_t t = 0; t < 6; ++t) {
      const double h = r.hist(t, 0, data::kHeading);
      EXPECT_GT(h, -std::numbers::pi);
      EXPECT_LE(h, std::numbers::pi);
    }
  }
}

TEST(Rotation, WrapAngle) {
  EXPECT_NEAR(data::wrap_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_EQ(data::wrap_angle(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(data::wrap_angle(0.5 + 4 * std::numbers::pi), 0.5, 1e-12);
}

TEST(Synth, ConstantVelocityKinematics) {
  const auto unit = data::constant_velocity_track({0, 0}, {1, 0}, 12);
  for (std::size_t t = 0; t < 12; ++t) {
    EXPECT_EQ(unit.positions[t].x, static_cast<double>(t));
    EXPECT_EQ(unit.positions[t].y, 0.0);
  }
  const auto fast = data::constant_velocity_track({0, 0}, {2, 0}, 12);
  for (std::size_t t = 0; t < 12; ++t) EXPECT_EQ(fast.positions[t].x, 2.0 * static_cast<double>(t));
}

TEST(Synth, StationaryPositionsIdentical) {
  nn::Rng rng(6);
  const auto s = data::synth_scene(data::SynthKind::Stationary, rng);
  for (std::size_t i = 0; i < s.num_agents(); ++i)
    for (std::size_t t = 1; t < 12; ++t) EXPECT_EQ(s.position(t, i), s.position(0, i));
}

TEST(Synth, CrossingPathsMeetAtMidpointFrame) {
  nn::Rng rng(7);
  for (int k = 0; k < 10; ++k) {
    const auto s = data::synth_scene(data::SynthKind::Crossing, rng);
    ASSERT_GE(s.num_agents(), 2u);
    EXPECT_NEAR(dist(s.position(6, 0), s.position(6, 1)), 0.0, 1e-9);
  }
}

TEST(Synth, DeterministicPerSeed) {
  for (auto kind : {data::SynthKind::ConstantVelocity, data::SynthKind::Turn,
                    data::SynthKind::Crossing, data::SynthKind::Stationary}) {
    nn::Rng a(42), b(42);
    const auto sa = data::synth_scene(kind, a);
    const auto sb = data::synth_scene(kind, b);
    EXPECT_EQ(sa.history, sb.history);
    EXPECT_EQ(sa.future, sb.future);
  }
}

TEST(Synth, UnknownKindListsKinds) {
  try {
    data::parse_synth_kind("zigzag");
    FAIL();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    for (const auto& k : data::synth_kind_names()) EXPECT_NE(msg.find(k), std::string::npos);
  }
}
