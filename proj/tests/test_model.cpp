#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "test_support.hpp"
#include "trajformer/data/synth.hpp"
#include "trajformer/model/network.hpp"

using namespace trajformer;
using model::ModelConfig;
using support::uniform_tensor;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.st_layers = 2;
  c.te_layers = 1;
  c.td_layers = 2;
  c.ff_hidden = 16;
  c.dropout = 0.0;
  return c;
}

std::vector<uint8_t> all_keep(std::size_t n) { return std::vector<uint8_t>(n, 1); }

nn::BoolTensor full_spatial(std::size_t t, std::size_t n) { return nn::BoolTensor({t, n, n}, true); }

model::AttentionParams identity_attention(std::size_t d) {
  std::vector<double> eye(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) eye[i * d + i] = 1.0;
  nn::Tensor id({d, d}, eye);
  return {id, id, id, id};
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

model::ModelInput single_input(const data::Scene& s, const ModelConfig& c) {
  return model::assemble_input(std::span(&s, 1), c);
}

}  // namespace

TEST(PositionalEncoding, OriginRow) {
  const auto pe = model::positional_encoding(1, 8);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(pe.at({0, 2 * i}), 0.0);
    EXPECT_EQ(pe.at({0, 2 * i + 1}), 1.0);
  }
}

TEST(PositionalEncoding, SinOfOne) {
  const auto pe = model::positional_encoding(2, 4);
  EXPECT_NEAR(pe.at({1, 0}), std::sin(1.0), 1e-15);
  EXPECT_NEAR(pe.at({1, 1}), std::cos(1.0), 1e-15);
  const std::vector<std::size_t> pos{100};
  const auto far = model::positional_encoding(pos, 4);
  EXPECT_NEAR(far.at({0, 2}), std::sin(1.0), 1e-12);
  EXPECT_NEAR(far.at({0, 3}), std::cos(1.0), 1e-12);
}

TEST(PositionalEncoding, ValuesBounded) {
  const auto pe = model::positional_encoding(500, 32);
  for (double v : pe.data()) {
    EXPECT_LE(std::abs(v), 1.0);
  }
  EXPECT_FALSE(pe.requires_grad());
}

TEST(CausalMask, LowerTriangular) {
  const auto m = model::causal_mask(1, 3);
  const std::vector<uint8_t> expected{1, 0, 0, 1, 1, 0, 1, 1, 1};
  EXPECT_EQ(m.values, expected);
}

TEST(Embedding, ZeroInputGivesBias) {
  const auto c = small_config();
  model::TrajectoryModel m(c, 1);
  const auto x = nn::Tensor::zeros({6, 3, c.input_width()});
  const auto h = model::embed_inputs(x, m.st_params(), all_keep(6 * 3 * c.d_model));
  const auto bias = m.st_params().embed_bias.data();
  for (std::size_t r = 0; r < 18; ++r)
    for (std::size_t k = 0; k < c.d_model; ++k) EXPECT_EQ(h.data()[r * c.d_model + k], bias[k]);
}

TEST(Embedding, IdenticalAgentsIdenticalRows) {
  const auto c = small_config();
  model::TrajectoryModel m(c, 2);
  nn::Rng rng(1);
  auto row = uniform_tensor({1, 1, c.input_width()}, rng);
  std::vector<double> v;
  for (int i = 0; i < 2; ++i) v.insert(v.end(), row.data().begin(), row.data().end());
  const auto h =
      model::embed_inputs(nn::Tensor({1, 2, c.input_width()}, v), m.st_params(), all_keep(2 * c.d_model));
  for (std::size_t k = 0; k < c.d_model; ++k) EXPECT_EQ(h.data()[k], h.data()[c.d_model + k]);
}

TEST(Embedding, WidthMismatchRejected) {
  const auto c = small_config();
  model::TrajectoryModel m(c, 3);
  const auto x = nn::Tensor::zeros({6, 2, c.input_width() + 1});
  try {
    model::embed_inputs(x, m.st_params(), all_keep(6 * 2 * c.d_model));
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("[6x2x12]"), std::string::npos) << e.what();
  }
}

TEST(SpatialAttention, FixtureWithIdentityWeights) {
  // Two agents with orthogonal unit states: softmax([1, 0] / sqrt(2)).
  const nn::Tensor h({1, 2, 2}, {1, 0, 0, 1});
  model::ForwardContext ctx;
  const auto out =
      model::spatial_self_attention(h, full_spatial(1, 2), identity_attention(2), 1, ctx);
  const double w = 1.0 / (1.0 + std::exp(-1.0 / std::sqrt(2.0)));
  EXPECT_NEAR(w, 0.6698, 5e-5);
  EXPECT_NEAR(out.at({0, 0, 0}), w, 1e-12);
  EXPECT_NEAR(out.at({0, 0, 1}), 1 - w, 1e-12);
  EXPECT_NEAR(out.at({0, 1, 1}), w, 1e-12);
}

TEST(SpatialAttention, SingleAgentAttendsToItself) {
  const auto c = small_config();
  model::TrajectoryModel m(c, 4);
  nn::Rng rng(4);
  const auto h = uniform_tensor({6, 1, c.d_model}, rng);
  model::ForwardContext ctx;
  const auto& p = m.st_params().layers[0].spatial;
  const auto out = model::spatial_self_attention(h, full_spatial(6, 1), p, c.heads, ctx);
  const auto expected = nn::matmul(nn::matmul(nn::reshape(h, {6, c.d_model}), p.w_v), p.w_o);
  EXPECT_LT(max_abs_diff(out.data(), expected.data()), 1e-12);
}

TEST(SpatialAttention, PermutationEquivariant) {
  const auto c = small_config();
  model::TrajectoryModel m(c, 5);
  nn::Rng rng(5);
  const std::size_t t_len = 4, n = 5;
  const auto h = uniform_tensor({t_len, n, c.d_model}, rng);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> hp(h.numel());
  for (std::size_t t = 0; t < t_len; ++t)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < c.d_model; ++k)
        hp[(t * n + i) * c.d_model + k] = h.data()[(t * n + perm[i]) * c.d_model + k];
  model::ForwardContext ctx;
  const auto& p = m.st_params().layers[0].spatial;
  const auto a = model::spatial_self_attention(h, full_spatial(t_len, n), p, c.heads, ctx);
  const auto b = model::spatial_self_attention(nn::Tensor(h.shape(), hp), full_spatial(t_len, n), p,
                                               c.heads, ctx);
  for (std::size_t t = 0; t < t_len; ++t)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < c.d_model; ++k)
        EXPECT_NEAR(b.data()[(t * n + i) * c.d_model + k],
                    a.data()[(t * n + perm[i]) * c.d_model + k], 1e-9);
}

TEST(SpatialAttention, FramesAreIndependent) {
  const auto c = small_config();
  model::TrajectoryModel m(c, 6);
  nn::Rng rng(6);
  auto h = uniform_tensor({4, 3, c.d_model}, rng);
  model::ForwardContext ctx;
  const auto& p = m.st_params().layers[0].spatial;
  const auto a = model::spatial_self_attention(h, full_spatial(4, 3), p, c.heads, ctx).to_vector();
  auto h2 = h.clone();
  for (std::size_t k = 0; k < 3 * c.d_model; ++k) h2.mutable_data()[2 * 3 * c.d_model + k] += 1.5;
  const auto b = model::spatial_self_attention(h2, full_spatial(4, 3), p, c.heads, ctx).to_vector();
  for (std::size_t t = 0; t < 4; ++t) {
    if (t == 2) continue;
    for (std::size_t k = 0; k < 3 * c.d_model; ++k)
      EXPECT_EQ(a[t * 3 * c.d_model + k], b[t * 3 * c.d_model + k]);
  }
}

TEST(TemporalConv, IdentityKernelNormalizesDoubledInput) {
  const auto c = small_config();
  const std::size_t d = c.d_model;
  std::vector<double> k(3 * d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) k[(1 * d + i) * d + i] = 1.0;
  const nn::Tensor kernel({3, 1, d, d}, k);
  model::ParamStore store;
  const auto norm = model::make_layer_norm(store, "ln", d);
  nn::Rng rng(7);
  const auto h = uniform_tensor({6, 2, d}, rng);
  model::ForwardContext ctx;
  const auto out = model::tcn_sublayer(h, kernel, norm, c, ctx);
  const auto expected = nn::layer_norm(nn::scale(h, 2.0), norm.gain, norm.bias, c.layer_norm_eps);
  EXPECT_LT(max_abs_diff(out.data(), expected.data()), 1e-12);
}

TEST(TemporalConv, AgentsDoNotMix) {
  const auto c = small_config();
  model::TrajectoryModel m(c, 8);
  nn::Rng rng(8);
  const auto h = uniform_tensor({6, 3, c.d_model}, rng);
  auto h2 = h.clone();
  for (std::size_t t = 0; t < 6; ++t) h2.mutable_data()[(t * 3 + 1) * c.d_model] -= 2.0;
  model::ForwardContext ctx;
  const auto& l = m.st_params().layers[0];
  const auto a = model::tcn_sublayer(h, l.tcn_kernel, l.tcn_norm, c, ctx).to_vector();
  const auto b = model::tcn_sublayer(h2, l.tcn_kernel, l.tcn_norm, c, ctx).to_vector();
  for (std::size_t t = 0; t < 6; ++t)
    for (std::size_t i : {0u, 2u})
      for (std::size_t k = 0; k < c.d_model; ++k)
        EXPECT_EQ(a[(t * 3 + i) * c.d_model + k], b[(t * 3 + i) * c.d_model + k]);
}

TEST(STEncoder, ZeroLayersIsEmbedding) {
  for (int variant = 0; variant < 2; ++variant) {
    auto c = small_config();
    if (variant == 0) {
      c.st_layers = 0;
    } else {
      c.spatial_attention = false;
      c.tcn = false;
    }
    model::TrajectoryModel m(c, 9);
    nn::Rng rng(9);
    const auto scene = data::normalize_scene(data::synth_scene(data::SynthKind::Crossing, rng));
    const auto in = single_input(scene, c);
    model::ForwardContext ctx;
    const auto out = model::st_encoder_forward(in.features, in.graph, in.keep, m.st_params(), c, ctx);
    const auto emb = model::embed_inputs(in.features, m.st_params(), in.keep);
    EXPECT_EQ(out.to_vector(), emb.to_vector());
  }
}

TEST(STEncoder, DistantAgentOutsideLimitHasNoInfluence) {
  auto c = small_config();
  c.spatial_limit = 15.0;
  c.te_layers = 0;
  c.temporal_encoder = model::FeedForwardKind::None;
  model::TrajectoryModel m(c, 10);
  std::vector<data::SynthTrack> a{data::constant_velocity_track({0, 0}, {1, 0}, 12),
                                  data::constant_velocity_track({0, 30}, {1, 0}, 12)};
  auto b = a;
  b[1] = data::constant_velocity_track({5, 25}, {-0.5, 0.3}, 12, data::Category::Cyclist);
  const auto sa = data::scene_from_tracks(a), sb = data::scene_from_tracks(b);
  model::ForwardContext ctx;
  const auto ea = m.encode(single_input(sa, c), ctx).to_vector();
  const auto eb = m.encode(single_input(sb, c), ctx).to_vector();
  for (std::size_t t = 0; t < 6; ++t)
    for (std::size_t k = 0; k < c.d_model; ++k)
      EXPECT_EQ(ea[(t * 2) * c.d_model + k], eb[(t * 2) * c.d_model + k]);
  // Without the limit the same change does leak through.
  c.spatial_limit.reset();
  model::TrajectoryModel full(c, 10);
  const auto fa = full.encode(single_input(sa, c), ctx).to_vector();
  const auto fb = full.encode(single_input(sb, c), ctx).to_vector();
  EXPECT_NE(fa[0], fb[0]);
}

TEST(TemporalEncoder, AgentsAreIndependent) {
  for (auto kind : {model::FeedForwardKind::SeparableConv, model::FeedForwardKind::Dense}) {
    auto c = small_config();
    c.temporal_encoder = kind;
    model::TrajectoryModel m(c, 11);
    nn::Rng rng(11);
    auto scene = data::synth_scene(data::SynthKind::Crossing, rng);
    const auto in = single_input(scene, c);
    const std::size_t n = in.num_agents;
    const auto mem = uniform_tensor({6, n, c.d_model}, rng);
    auto mem2 = mem.clone();
    for (std::size_t t = 0; t < 6; ++t) mem2.mutable_data()[(t * n + 1) * c.d_model + 3] += 1.0;
    model::ForwardContext ctx;
    const auto a =
        model::temporal_encoder_forward(mem, in.graph, in.keep, m.temporal_params(), c, ctx).to_vector();
    const auto b =
        model::temporal_encoder_forward(mem2, in.graph, in.keep, m.temporal_params(), c, ctx).to_vector();
    for (std::size_t t = 0; t < 6; ++t)
      for (std::size_t i = 0; i < n; ++i) {
        if (i == 1) continue;
        for (std::size_t k = 0; k < c.d_model; ++k)
          EXPECT_EQ(a[(t * n + i) * c.d_model + k], b[(t * n + i) * c.d_model + k]);
      }
  }
}

TEST(Decoder, CausalInEveryRow) {
  for (auto kind : {model::FeedForwardKind::SeparableConv, model::FeedForwardKind::Dense}) {
    auto c = small_config();
    c.decoder_ff = kind;
    model::TrajectoryModel m(c, 12);
    nn::Rng rng(12);
    const auto scene = data::normalize_scene(data::synth_scene(data::SynthKind::Turn, rng));
    const auto in = single_input(scene, c);
    model::ForwardContext ctx;
    const auto enc = m.encode(in, ctx);
    const std::size_t n = in.num_agents, s_len = 6;
    const auto prev = uniform_tensor({s_len, n, 2}, rng);
    const auto base = m.decode(prev, enc, in, ctx).to_vector();
    for (std::size_t s = 0; s < s_len; ++s) {
      auto changed = prev.clone();
      for (std::size_t r = s; r < s_len; ++r)
        for (std::size_t k = 0; k < n * 2; ++k) changed.mutable_data()[r * n * 2 + k] += 3.0;
      const auto out = m.decode(changed, enc, in, ctx).to_vector();
      const std::size_t row = n * c.d_model;
      for (std::size_t q = 0; q < s * row; ++q) EXPECT_NEAR(out[q], base[q], 1e-12);
      if (s + 1 < s_len) EXPECT_NE(out[s * row], base[s * row]);
    }
  }
}

TEST(Decoder, EmptyInputRejected) {
  const auto c = small_config();
  model::TrajectoryModel m(c, 13);
  nn::Rng rng(13);
  const auto scene = data::synth_scene(data::SynthKind::Turn, rng);
  const auto in = single_input(scene, c);
  model::ForwardContext ctx;
  const auto enc = m.encode(in, ctx);
  EXPECT_THROW(m.decode(nn::Tensor::zeros({0, in.num_agents, 2}), enc, in, ctx),
               std::invalid_argument);
}

TEST(Model, ZeroGeneratorForecastsStationary) {
  const auto c = small_config();
  model::TrajectoryModel m(c, 14);
  auto w = m.temporal_params().generator_weight;
  auto b = m.temporal_params().generator_bias;
  std::fill(w.mutable_data().begin(), w.mutable_data().end(), 0.0);
  std::fill(b.mutable_data().begin(), b.mutable_data().end(), 0.0);
  nn::Rng rng(14);
  const auto scene = data::synth_scene(data::SynthKind::ConstantVelocity, rng);
  const auto f = model::generate_trajectory(m, scene);
  for (std::size_t t = 0; t < 6; ++t)
    for (std::size_t i = 0; i < scene.num_agents(); ++i) {
      EXPECT_NEAR(f.at(t, i).x, scene.last_observed(i).x, 1e-9);
      EXPECT_NEAR(f.at(t, i).y, scene.last_observed(i).y, 1e-9);
    }
}

TEST(Model, TeacherForcingOnOwnOutputsMatchesAutoregressive) {
  const auto c = small_config();
  model::TrajectoryModel m(c, 15);
  nn::Rng rng(15);
  const auto scene = data::normalize_scene(data::synth_scene(data::SynthKind::Crossing, rng));
  auto in = single_input(scene, c);
  model::ForwardContext ctx;
  const auto ar = m.predict_autoregressive(in, ctx);
  EXPECT_EQ(ar.shape(), (nn::Shape{6, in.num_agents, 2}));
  in.future = ar.detach();
  const auto tf = m.predict_teacher_forced(in, ctx);
  EXPECT_LT(max_abs_diff(ar.data(), tf.data()), 1e-9);
}

TEST(Model, BatchingMatchesSingleScenes) {
  const auto c = small_config();
  model::TrajectoryModel m(c, 16);
  nn::Rng rng(16);
  std::vector<data::Scene> scenes{
      data::normalize_scene(data::synth_scene(data::SynthKind::Crossing, rng)),
      data::normalize_scene(data::synth_scene(data::SynthKind::Turn, rng))};
  model::ForwardContext ctx;
  const auto batch = model::assemble_input(scenes, c);
  const auto joint = m.predict_autoregressive(batch, ctx).to_vector();
  const std::size_t total = batch.num_agents;
  for (std::size_t k = 0; k < scenes.size(); ++k) {
    const auto alone = m.predict_autoregressive(single_input(scenes[k], c), ctx).to_vector();
    const std::size_t n = scenes[k].num_agents(), off = batch.scene_offsets[k];
    for (std::size_t t = 0; t < 6; ++t)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t q = 0; q < 2; ++q)
          EXPECT_NEAR(joint[(t * total + off + i) * 2 + q], alone[(t * n + i) * 2 + q], 1e-12);
  }
}

TEST(Model, ForecastShapeAndDeterminism) {
  const auto c = small_config();
  model::TrajectoryModel a(c, 17), b(c, 17), other(c, 18);
  nn::Rng rng(17);
  const auto scene = data::synth_scene(data::SynthKind::Crossing, rng);
  const auto fa = model::generate_trajectory(a, scene);
  const auto fb = model::generate_trajectory(b, scene);
  EXPECT_EQ(fa.t_pred, 6u);
  EXPECT_EQ(fa.num_agents, scene.num_agents());
  EXPECT_EQ(fa.positions, fb.positions);
  EXPECT_NE(fa.positions, model::generate_trajectory(other, scene).positions);
  for (double v : fa.positions) EXPECT_TRUE(std::isfinite(v));
}

TEST(Model, WindowMismatchRejected) {
  const auto c = small_config();
  nn::Rng rng(19);
  const auto scene = data::synth_scene(data::SynthKind::Turn, rng, 8, 6);
  EXPECT_THROW(single_input(scene, c), std::invalid_argument);
}

TEST(Config, KeyValueRoundTrip) {
  auto c = small_config();
  c.features = data::FeatureSet::Coordinates;
  c.spatial_limit = 12.5;
  c.decoder_ff = model::FeedForwardKind::Dense;
  c.tcn = false;
  const auto kv = model::to_key_values(c);
  ModelConfig back;
  for (const auto& [k, v] : kv) EXPECT_TRUE(model::apply_key_value(back, k, v)) << k;
  EXPECT_EQ(model::to_key_values(back), kv);
  EXPECT_FALSE(model::apply_key_value(back, "no_such_key", "1"));
}

TEST(Config, ValidationRejectsBadShapes) {
  auto c = small_config();
  c.heads = 3;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.tcn_kernel = 2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Checkpoint, RoundTripReproducesForecasts) {
  support::TempDir dir("ckpt");
  auto c = small_config();
  c.spatial_limit = 20.0;
  model::TrajectoryModel m(c, 20);
  model::save_model(dir / "m.ckpt", m);
  const auto loaded = model::load_model(dir / "m.ckpt");
  EXPECT_EQ(model::to_key_values(loaded.config()), model::to_key_values(c));
  ASSERT_EQ(loaded.params().entries().size(), m.params().entries().size());
  for (std::size_t i = 0; i < m.params().entries().size(); ++i)
    EXPECT_EQ(loaded.params().entries()[i].tensor.to_vector(),
              m.params().entries()[i].tensor.to_vector());
  nn::Rng rng(20);
  const auto scene = data::synth_scene(data::SynthKind::Crossing, rng);
  EXPECT_EQ(model::generate_trajectory(m, scene).positions,
            model::generate_trajectory(loaded, scene).positions);
}

TEST(Checkpoint, MismatchedArchitectureIsDescriptive) {
  support::TempDir dir("ckpt");
  auto c = small_config();
  model::TrajectoryModel m(c, 21);
  model::save_model(dir / "m.ckpt", m);
  c.d_model = 16;
  model::TrajectoryModel bigger(c, 21);
  try {
    model::assign_parameters(bigger.params(), model::load_checkpoint(dir / "m.ckpt"));
    FAIL();
  } catch (const model::CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("shape"), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, CorruptFilesRejected) {
  support::TempDir dir("ckpt");
  support::write_file(dir / "bad.ckpt", "not a checkpoint");
  EXPECT_THROW(model::load_checkpoint(dir / "bad.ckpt"), model::CheckpointError);
  EXPECT_THROW(model::load_checkpoint(dir / "missing.ckpt"), model::CheckpointError);
  model::TrajectoryModel m(small_config(), 22);
  model::save_model(dir / "m.ckpt", m);
  const auto bytes = support::read_file(dir / "m.ckpt");
  support::write_file(dir / "cut.ckpt", bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(model::load_checkpoint(dir / "cut.ckpt"), model::CheckpointError);
}
