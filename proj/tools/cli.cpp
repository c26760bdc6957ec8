#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "trajformer/data/synth.hpp"
#include "trajformer/eval/baseline.hpp"
#include "trajformer/eval/evaluate.hpp"
#include "trajformer/eval/svg_plot.hpp"
#include "trajformer/model/network.hpp"
#include "trajformer/training/gradcheck_suite.hpp"
#include "trajformer/training/manifest.hpp"
#include "trajformer/training/trainer.hpp"

namespace trajformer::cli {

namespace fs = std::filesystem;

namespace {

// Problems with how the tool was invoked (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

data::DatasetSplit load_windows(const std::string& path, std::size_t t_obs, std::size_t t_pred,
                                std::size_t stride) {
  if (path.empty()) throw UsageError("no dataset path given");
  if (!fs::exists(path)) throw UsageError("dataset not found: " + path);
  const auto log = data::parse_trajectory_file(path);
  data::WindowOptions w;
  w.t_obs = t_obs;
  w.t_total = t_obs + t_pred;
  w.stride = stride;
  return data::build_scenes(log.frames, w);
}

void require_scenes(const data::DatasetSplit& split, const std::string& path, std::size_t frames) {
  if (split.scenes.empty()) {
    throw std::runtime_error(path + ": no run of " + std::to_string(frames) +
                             " consecutive frames to build a scene from");
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("failed writing " + path.string());
}

struct TrainArgs {
  std::string config_path, out_dir, train_data, val_data;
  std::vector<std::string> settings;
  int row = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_steps, batch_size, warmup_steps;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  training::TrainConfig config;
  if (!a.config_path.empty()) config = training::load_train_config(a.config_path);
  if (a.row) training::apply_setting(config, "ablation_row", std::to_string(a.row));
  if (a.seed) config.seed = *a.seed;
  if (a.max_steps) config.max_steps = *a.max_steps;
  if (a.batch_size) config.batch_size = *a.batch_size;
  if (a.warmup_steps) config.warmup_steps = *a.warmup_steps;
  if (!a.train_data.empty()) config.train_data = a.train_data;
  if (!a.val_data.empty()) config.val_data = a.val_data;
  for (const auto& s : a.settings) training::apply_assignment(config, s);
  config.validate();

  const auto& m = config.model;
  const auto train_split = load_windows(config.train_data, m.t_obs, m.t_pred, config.stride);
  require_scenes(train_split, config.train_data, m.t_obs + m.t_pred);
  std::vector<data::Scene> val;
  if (!config.val_data.empty()) {
    auto split = load_windows(config.val_data, m.t_obs, m.t_pred, config.stride);
    val = std::move(split.scenes);
  }

  const fs::path dir = a.out_dir;
  training::RunManifest manifest;
  manifest.command = "train";
  manifest.config = training::to_key_values(config);
  manifest.seed = config.seed;
  manifest.datasets = {config.train_data};
  if (!config.val_data.empty()) manifest.datasets.push_back(config.val_data);
  manifest.checkpoint = (dir / training::kFinalCheckpoint).string();
  training::write_manifest(dir, manifest);
  {
    std::ostringstream cfg;
    training::write_config(cfg, config);
    write_text_file(dir / "config.txt", cfg.str());
  }

  model::TrajectoryModel net(config.model, config.seed);
  out << "training on " << train_split.scenes.size() << " scenes ("
      << net.params().parameter_count() << " parameters)\n";
  training::TrainArtifacts artifacts{dir, a.quiet ? nullptr : &out};
  const auto result = training::train(net, train_split.scenes, val, config, artifacts);
  if (result.final_validation) {
    eval::write_report_table(out, *result.final_validation, "validation");
  }
  out << "checkpoint: " << result.last_checkpoint.string() << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, baseline, data, out_dir, predictions;
  std::optional<std::size_t> stride;  // default: non-overlapping windows
};

eval::Predictor make_predictor(const std::string& baseline, const std::string& checkpoint,
                               std::optional<model::TrajectoryModel>& holder,
                               std::size_t& t_obs, std::size_t& t_pred) {
  if (!baseline.empty()) {
    if (baseline != "cv") throw UsageError("unknown baseline '" + baseline + "' (available: cv)");
    return eval::cv_baseline;
  }
  if (checkpoint.empty()) throw UsageError("give --checkpoint or --baseline cv");
  try {
    holder.emplace(model::load_model(checkpoint));
  } catch (const model::CheckpointError& e) {
    throw model::CheckpointError("cannot load " + checkpoint + ": " + e.what());
  }
  t_obs = holder->config().t_obs;
  t_pred = holder->config().t_pred;
  return eval::model_predictor(*holder);
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  std::optional<model::TrajectoryModel> net;
  std::size_t t_obs = 6, t_pred = 6;
  const auto predictor = make_predictor(a.baseline, a.checkpoint, net, t_obs, t_pred);
  const std::size_t stride = a.stride.value_or(t_obs + t_pred);
  const auto split = load_windows(a.data, t_obs, t_pred, stride);
  require_scenes(split, a.data, t_obs + t_pred);
  const auto result = eval::evaluate(predictor, split.scenes, !a.predictions.empty());
  const std::string label = a.baseline.empty() ? "model" : a.baseline;
  eval::write_report_table(out, result.report, label);

  if (!a.predictions.empty()) {
    std::ostringstream text;
    for (std::size_t k = 0; k < split.scenes.size(); ++k) {
      const auto records = eval::forecast_to_records(split.scenes[k], result.forecasts[k]);
      data::write_trajectory_stream(text, records);
    }
    write_text_file(a.predictions, text.str());
  }
  if (!a.out_dir.empty()) {
    const fs::path dir = a.out_dir;
    std::ostringstream table, csv, scenes;
    eval::write_report_table(table, result.report, label);
    eval::write_report_csv(csv, result.report, label);
    eval::write_scene_csv(scenes, result.scenes);
    write_text_file(dir / "report.txt", table.str());
    write_text_file(dir / "report.csv", csv.str());
    write_text_file(dir / "scenes.csv", scenes.str());
    training::RunManifest manifest;
    manifest.command = "eval";
    if (net) manifest.config = model::to_key_values(net->config());
    else manifest.config = {{"baseline", a.baseline}};
    manifest.config.emplace_back("stride", std::to_string(stride));
    manifest.datasets = {a.data};
    manifest.checkpoint = a.checkpoint;
    training::write_manifest(dir, manifest);
  }
  return kExitOk;
}

struct PredictArgs {
  std::string checkpoint, baseline, scene_file, out_dir;
  bool plot = false;
  bool no_future = false;
  std::optional<std::size_t> stride;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  std::optional<model::TrajectoryModel> net;
  std::size_t t_obs = 6, t_pred = 6;
  const auto predictor = make_predictor(a.baseline, a.checkpoint, net, t_obs, t_pred);
  if (!fs::exists(a.scene_file)) throw UsageError("scene file not found: " + a.scene_file);
  const auto log = data::parse_trajectory_file(a.scene_file);

  data::DatasetSplit split;
  if (a.no_future) {
    split = data::build_observed_scenes(log.frames, t_obs, t_pred, a.stride.value_or(t_obs));
    if (split.scenes.empty()) {
      throw std::runtime_error(a.scene_file + ": fewer than " + std::to_string(t_obs) +
                               " consecutive observed frames");
    }
  } else {
    data::WindowOptions w;
    w.t_obs = t_obs;
    w.t_total = t_obs + t_pred;
    w.stride = a.stride.value_or(w.t_total);
    split = data::build_scenes(log.frames, w);
    if (split.scenes.empty()) {
      throw std::runtime_error(a.scene_file + ": no run of " + std::to_string(w.t_total) +
                               " consecutive frames (" + std::to_string(t_obs) +
                               " observed + " + std::to_string(t_pred) +
                               " future); use --no-future for observation-only input");
    }
  }

  const fs::path dir = a.out_dir;
  std::ostringstream text;
  for (std::size_t k = 0; k < split.scenes.size(); ++k) {
    const auto& scene = split.scenes[k];
    const auto forecast = predictor(scene);
    data::write_trajectory_stream(text, eval::forecast_to_records(scene, forecast));
    if (a.plot) {
      std::ostringstream svg;
      eval::write_svg_plot(svg, scene, forecast);
      char name[32];
      std::snprintf(name, sizeof(name), "scene-%04zu.svg", k);
      write_text_file(dir / name, svg.str());
    }
  }
  write_text_file(dir / "predictions.txt", text.str());
  training::RunManifest manifest;
  manifest.command = "predict";
  if (net) manifest.config = model::to_key_values(net->config());
  else manifest.config = {{"baseline", a.baseline}};
  manifest.config.emplace_back("no_future", a.no_future ? "on" : "off");
  manifest.datasets = {a.scene_file};
  manifest.checkpoint = a.checkpoint;
  training::write_manifest(dir, manifest);
  out << "predicted " << split.scenes.size() << " scenes into " << dir.string() << '\n';
  return kExitOk;
}

struct SynthArgs {
  std::string kind, out_path;
  std::size_t count = 10;
  std::uint64_t seed = 1;
  std::size_t t_obs = 6, t_pred = 6;
};

// Scenes are spaced so that no window spans two of them.
inline constexpr long kSceneFrameSpacing = 20;
inline constexpr long kSceneIdSpacing = 1000;

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  data::SynthKind kind;
  try {
    kind = data::parse_synth_kind(a.kind);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.t_obs + a.t_pred + 1 > static_cast<std::size_t>(kSceneFrameSpacing)) {
    throw UsageError("synthetic windows are limited to " +
                     std::to_string(kSceneFrameSpacing - 1) + " frames");
  }
  nn::Rng rng(a.seed);
  std::ostringstream text;
  for (std::size_t k = 0; k < a.count; ++k) {
    const auto scene = data::synth_scene(kind, rng, a.t_obs, a.t_pred);
    const long id = static_cast<long>(k);
    data::write_trajectory_stream(
        text, data::scene_to_records(scene, 1 + id * kSceneFrameSpacing, id * kSceneIdSpacing));
  }
  write_text_file(a.out_path, text.str());
  training::RunManifest manifest;
  manifest.command = "synth";
  manifest.config = {{"kind", data::synth_kind_name(kind)},
                     {"count", std::to_string(a.count)},
                     {"t_obs", std::to_string(a.t_obs)},
                     {"t_pred", std::to_string(a.t_pred)}};
  manifest.seed = a.seed;
  manifest.datasets = {a.out_path};
  training::write_manifest_file(a.out_path + ".manifest.json", manifest);
  out << "wrote " << a.count << " " << data::synth_kind_name(kind) << " scenes to " << a.out_path
      << '\n';
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, std::ostream& out) {
  const auto entries = training::run_gradcheck_suite(seed);
  bool ok = true;
  for (const auto& e : entries) {
    char line[200];
    std::snprintf(line, sizeof(line), "%-36s max_rel=%.3e  max_abs=%.3e  n=%-5zu tol=%.0e  %s\n",
                  e.name.c_str(), e.max_rel_error, e.max_abs_error, e.elements, e.tolerance,
                  e.passed() ? "PASS" : "FAIL");
    out << line;
    ok = ok && e.passed();
  }
  return ok ? kExitOk : kExitRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-agent trajectory forecasting with spatio-temporal transformers",
               "trajformer"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", train_args.config_path, "key=value configuration file");
  train->add_option("--out", train_args.out_dir, "run directory")->required();
  train->add_option("--train-data", train_args.train_data, "training trajectories");
  train->add_option("--val-data", train_args.val_data, "validation trajectories");
  train->add_option("--ablation,--set", train_args.settings,
                    "override any configuration key, e.g. ss=off (repeatable)");
  train->add_option("--row", train_args.row, "ablation preset 1-8 (8 = full model)")
      ->check(CLI::Range(1, 8));
  train->add_option("--seed", train_args.seed, "random seed");
  train->add_option("--max-steps", train_args.max_steps, "optimizer steps");
  train->add_option("--batch-size", train_args.batch_size, "scenes per batch");
  train->add_option("--warmup-steps", train_args.warmup_steps, "learning-rate warmup");
  train->add_flag("--quiet", train_args.quiet, "no per-step log");

  EvalArgs eval_args;
  auto* evaluate = app.add_subcommand("eval", "score a checkpoint or baseline");
  evaluate->add_option("--checkpoint", eval_args.checkpoint, "model checkpoint");
  evaluate->add_option("--baseline", eval_args.baseline, "baseline instead of a model (cv)");
  evaluate->add_option("--data", eval_args.data, "trajectories with ground truth")->required();
  evaluate->add_option("--out", eval_args.out_dir, "directory for report files");
  evaluate->add_option("--predictions", eval_args.predictions, "write forecasts to this file");
  evaluate->add_option("--stride", eval_args.stride, "window stride")->check(CLI::PositiveNumber);

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "forecast the scenes of a trajectory file");
  predict->add_option("--checkpoint", predict_args.checkpoint, "model checkpoint");
  predict->add_option("--baseline", predict_args.baseline, "baseline instead of a model (cv)");
  predict->add_option("--scene", predict_args.scene_file, "trajectory file")->required();
  predict->add_option("--out", predict_args.out_dir, "output directory")->required();
  predict->add_flag("--plot", predict_args.plot, "write one SVG per scene");
  predict->add_flag("--no-future", predict_args.no_future, "input holds observed frames only");
  predict->add_option("--stride", predict_args.stride, "window stride")
      ->check(CLI::PositiveNumber);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "write synthetic scenes");
  synth->add_option("--kind", synth_args.kind, "constant_velocity, turn, crossing, stationary")
      ->required();
  synth->add_option("--count", synth_args.count, "number of scenes");
  synth->add_option("--seed", synth_args.seed, "random seed");
  synth->add_option("--out", synth_args.out_path, "output file")->required();
  synth->add_option("--t-obs", synth_args.t_obs, "observed frames")->check(CLI::PositiveNumber);
  synth->add_option("--t-pred", synth_args.t_pred, "predicted frames")->check(CLI::PositiveNumber);

  std::uint64_t gradcheck_seed = 7;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradcheck->add_option("--seed", gradcheck_seed, "random seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_args, out);
    if (*evaluate) return cmd_eval(eval_args, out);
    if (*predict) return cmd_predict(predict_args, out);
    if (*synth) return cmd_synth(synth_args, out);
    if (*gradcheck) return cmd_gradcheck(gradcheck_seed, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const training::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace trajformer::cli
