#include "trajformer/training/gradcheck_suite.hpp"

#include <map>
#include <random>

#include "trajformer/data/synth.hpp"
#include "trajformer/model/attention.hpp"
#include "trajformer/model/network.hpp"
#include "trajformer/numerics/gradcheck.hpp"
#include "trajformer/training/loss.hpp"

namespace trajformer::training {

using nn::Tensor;

namespace {

// Uniform in [-2, 2], optionally shrunk.
Tensor random_tensor(nn::Shape shape, nn::Rng& rng, bool grad = true, double scale = 1.0) {
  std::uniform_real_distribution<double> uniform(-2.0, 2.0);
  std::vector<double> v(nn::shape_numel(shape));
  for (auto& x : v) x = scale * uniform(rng);
  return Tensor(std::move(shape), std::move(v), grad);
}

nn::BoolTensor random_mask(nn::Shape shape, nn::Rng& rng) {
  nn::BoolTensor m(shape, true);
  std::bernoulli_distribution keep(0.7);
  const std::size_t lk = shape.back();
  for (std::size_t row = 0; row < m.values.size() / lk; ++row) {
    for (std::size_t j = 0; j < lk; ++j) m.values[row * lk + j] = keep(rng) ? 1 : 0;
    m.values[row * lk] = 1;  // keep one admissible key per row
  }
  return m;
}

class PrimitiveChecks {
 public:
  explicit PrimitiveChecks(std::uint64_t seed) : rng_(seed) {}

  // Projects the output on a fixed random tensor so that every output
  // element carries a distinct weight in the scalar loss.
  template <typename Fn>
  void check(const std::string& name, std::vector<Tensor> inputs, Fn fn) {
    Tensor probe;
    auto loss = [&]() {
      const auto out = fn(inputs);
      if (!probe.defined()) probe = random_tensor(out.shape(), rng_, false);
      return nn::sum(nn::mul(out, probe));
    };
    const auto r = nn::check_gradients(loss, inputs);
    entries_.push_back({name, true, r.max_rel_error, r.max_abs_error, r.elements_checked,
                        kPrimitiveTolerance});
  }

  nn::Rng& rng() { return rng_; }
  std::vector<GradCheckEntry> take() { return std::move(entries_); }

 private:
  nn::Rng rng_;
  std::vector<GradCheckEntry> entries_;
};

}  // namespace

model::ModelConfig gradcheck_model_config(model::FeedForwardKind ff) {
  model::ModelConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.st_layers = c.te_layers = c.td_layers = 1;
  c.tcn_kernel = c.sep_kernel = 3;
  c.ff_hidden = 16;
  c.dropout = 0.0;
  c.temporal_encoder = ff;
  c.decoder_ff = ff;
  return c;
}

data::Scene gradcheck_scene() {
  const std::size_t frames = 12;
  std::vector<data::SynthTrack> tracks;
  tracks.push_back(data::constant_velocity_track({0.0, 0.0}, {1.2, 0.1}, frames));
  auto ped = data::constant_velocity_track({3.0, -2.0}, {0.1, 0.4}, frames, data::Category::Pedestrian);
  ped.length = ped.width = 0.6;
  // gentle curve so the targets are not exactly linear
  for (std::size_t t = 0; t < frames; ++t) ped.positions[t].x += 0.02 * static_cast<double>(t * t);
  tracks.push_back(ped);
  auto bike = data::constant_velocity_track({-2.0, 4.0}, {0.8, -0.5}, frames, data::Category::Cyclist);
  bike.length = 1.8;
  bike.width = 0.7;
  tracks.push_back(bike);
  auto scene = data::scene_from_tracks(tracks, 6, 6);
  scene.set_present(0, 2, false);
  for (std::size_t f = 0; f < data::kHistoryFields; ++f) scene.hist(0, 2, f) = 0.0;
  return scene;
}

std::vector<GradCheckEntry> check_primitives(std::uint64_t seed) {
  PrimitiveChecks pc(seed);
  auto& rng = pc.rng();
  using V = std::vector<Tensor>&;

  pc.check("add", {random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)},
           [](V in) { return nn::add(in[0], in[1]); });
  pc.check("sub", {random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)},
           [](V in) { return nn::sub(in[0], in[1]); });
  pc.check("mul", {random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)},
           [](V in) { return nn::mul(in[0], in[1]); });
  pc.check("relu", {random_tensor({4, 5}, rng)}, [](V in) { return nn::relu(in[0]); });
  pc.check("add_bias", {random_tensor({2, 3, 4}, rng), random_tensor({4}, rng)},
           [](V in) { return nn::add_bias(in[0], in[1]); });
  {
    std::vector<std::uint8_t> keep = {1, 0, 1, 1, 0, 1, 1, 1, 0, 1, 1, 1};
    pc.check("apply_mask", {random_tensor({3, 4}, rng)},
             [keep](V in) { return nn::apply_mask(in[0], keep); });
  }
  pc.check("matmul", {random_tensor({3, 4}, rng), random_tensor({4, 5}, rng)},
           [](V in) { return nn::matmul(in[0], in[1]); });
  pc.check("bmm", {random_tensor({2, 3, 4}, rng), random_tensor({2, 4, 5}, rng)},
           [](V in) { return nn::bmm(in[0], in[1]); });
  pc.check("linear",
           {random_tensor({2, 3, 4}, rng), random_tensor({4, 5}, rng), random_tensor({5}, rng)},
           [](V in) { return nn::linear(in[0], in[1], in[2]); });
  pc.check("reshape+permute", {random_tensor({2, 3, 4}, rng)}, [](V in) {
    return nn::permute(nn::reshape(in[0], {3, 2, 4}), {2, 0, 1});
  });
  pc.check("slice+concat", {random_tensor({4, 3}, rng), random_tensor({2, 3}, rng)}, [](V in) {
    const std::vector<Tensor> parts{nn::slice(in[0], 0, 1, 3), in[1]};
    return nn::concat(parts, 0);
  });
  pc.check("cumsum", {random_tensor({5, 2, 2}, rng)}, [](V in) { return nn::cumsum(in[0], 0); });
  pc.check("softmax", {random_tensor({3, 5}, rng)}, [](V in) { return nn::softmax(in[0], 1); });
  pc.check("layer_norm",
           {random_tensor({3, 6}, rng), random_tensor({6}, rng), random_tensor({6}, rng)},
           [](V in) { return nn::layer_norm(in[0], in[1], in[2]); });
  pc.check("conv2d_temporal", {random_tensor({6, 3, 4}, rng), random_tensor({3, 1, 4, 5}, rng)},
           [](V in) {
             return nn::conv2d_temporal(in[0], in[1], nn::TemporalPadding::symmetric(3));
           });
  pc.check("depthwise_conv(causal)", {random_tensor({6, 3, 4}, rng), random_tensor({3, 4}, rng)},
           [](V in) {
             return nn::depthwise_conv_temporal(in[0], in[1], nn::TemporalPadding::causal(3));
           });
  pc.check("separable_conv",
           {random_tensor({6, 3, 4}, rng), random_tensor({3, 4}, rng), random_tensor({4, 4}, rng)},
           [](V in) {
             return nn::separable_conv(in[0], in[1], in[2], nn::TemporalPadding::symmetric(3));
           });
  {
    auto mask = random_mask({2, 4, 5}, rng);
    pc.check("attention(masked)",
             {random_tensor({2, 4, 3}, rng), random_tensor({2, 5, 3}, rng),
              random_tensor({2, 5, 3}, rng)},
             [mask](V in) {
               return nn::scaled_dot_product_attention(in[0], in[1], in[2], &mask).output;
             });
  }
  {
    const std::size_t d = 8;
    auto mask = random_mask({3, 4, 4}, rng);
    auto x = random_tensor({3, 4, d}, rng);
    auto wq = random_tensor({d, d}, rng, true, 0.25), wk = random_tensor({d, d}, rng, true, 0.25);
    auto wv = random_tensor({d, d}, rng, true, 0.25), wo = random_tensor({d, d}, rng, true, 0.25);
    pc.check("multi_head_attention", {x, wq, wk, wv, wo}, [mask](V in) {
      model::AttentionParams p{in[1], in[2], in[3], in[4]};
      model::ForwardContext ctx;
      return model::multi_head_attention(in[0], in[0], p, 2, &mask, ctx, "check");
    });
  }
  {
    auto pred = random_tensor({6, 3, 2}, rng);
    auto gt = random_tensor({6, 3, 2}, rng, false);
    std::vector<std::uint8_t> valid(18, 1);
    valid[5] = valid[16] = 0;
    pc.check("l2_loss", {pred}, [gt, valid](V in) {
      return nn::reshape(l2_loss(in[0], gt, valid), {1});
    });
  }
  return pc.take();
}

std::vector<GradCheckEntry> check_model(const model::ModelConfig& config, std::uint64_t seed,
                                        const std::string& label) {
  model::TrajectoryModel net(config, seed);
  const auto scene = data::normalize_scene(gradcheck_scene());
  const auto input = model::assemble_input(std::span(&scene, 1), config);
  auto loss_fn = [&]() {
    model::ForwardContext ctx;
    const auto pred = net.predict_teacher_forced(input, ctx);
    return l2_loss(pred, input.future, input.future_valid);
  };

  std::map<std::string, std::vector<Tensor>> groups;
  std::vector<std::string> order;
  for (const auto& p : net.params().entries()) {
    const auto dot = p.name.rfind('.');
    const auto group = dot == std::string::npos ? p.name : p.name.substr(0, dot);
    if (!groups.count(group)) order.push_back(group);
    groups[group].push_back(p.tensor);
  }
  std::vector<GradCheckEntry> out;
  for (const auto& g : order) {
    const auto r = nn::check_gradients(loss_fn, groups[g]);
    out.push_back({label + ":" + g, false, r.max_rel_error, r.max_abs_error, r.elements_checked,
                   kModelTolerance});
  }
  return out;
}

std::vector<GradCheckEntry> run_gradcheck_suite(std::uint64_t seed) {
  auto out = check_primitives(seed);
  auto sc = check_model(gradcheck_model_config(model::FeedForwardKind::SeparableConv), seed,
                        "model[sc]");
  auto fc = check_model(gradcheck_model_config(model::FeedForwardKind::Dense), seed, "model[fc]");
  out.insert(out.end(), sc.begin(), sc.end());
  out.insert(out.end(), fc.begin(), fc.end());
  return out;
}

}  // namespace trajformer::training
