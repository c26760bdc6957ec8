#include "trajformer/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

#include "trajformer/eval/evaluate.hpp"
#include "trajformer/training/adam.hpp"
#include "trajformer/training/loss.hpp"
#include "trajformer/training/schedule.hpp"

namespace trajformer::training {

DivergenceError::DivergenceError(std::size_t step, std::filesystem::path last_checkpoint)
    : std::runtime_error("training diverged at step " + std::to_string(step) +
                         " (non-finite loss); last good checkpoint: " +
                         (last_checkpoint.empty() ? std::string("none")
                                                  : last_checkpoint.string())),
      step_(step),
      last_checkpoint_(std::move(last_checkpoint)) {}

void write_loss_row(std::ostream& out, const LossRecord& row) {
  out << row.step << ',' << data::format_double(row.lr) << ','
      << data::format_double(row.train_loss) << ','
      << (row.val_wsade ? data::format_double(*row.val_wsade) : "") << ','
      << (row.val_wsfde ? data::format_double(*row.val_wsfde) : "") << '\n';
}

void write_loss_csv(std::ostream& out, std::span<const LossRecord> rows) {
  out << "step,lr,train_loss,val_WSADE,val_WSFDE\n";
  for (const auto& row : rows) write_loss_row(out, row);
}

namespace {

// Draws batches without replacement, reshuffling once every scene was used.
class BatchSampler {
 public:
  BatchSampler(std::size_t count, std::size_t batch) : order_(count), batch_(std::min(batch, count)) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    cursor_ = count;
  }

  std::vector<std::size_t> next(nn::Rng& rng) {
    std::vector<std::size_t> out;
    while (out.size() < batch_) {
      if (cursor_ == order_.size()) {
        std::shuffle(order_.begin(), order_.end(), rng);
        cursor_ = 0;
      }
      out.push_back(order_[cursor_++]);
    }
    return out;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t cursor_ = 0;
};

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t step) {
  char name[40];
  std::snprintf(name, sizeof(name), "step-%08zu.ckpt", step);
  return dir / "checkpoints" / name;
}

}  // namespace

TrainResult train(model::TrajectoryModel& model, std::span<const data::Scene> train_scenes,
                  std::span<const data::Scene> val_scenes, const TrainConfig& config,
                  const TrainArtifacts& artifacts) {
  config.validate();
  if (train_scenes.empty()) throw std::invalid_argument("train: the training split is empty");
  if (val_scenes.empty()) val_scenes = train_scenes;

  std::vector<data::Scene> normalized;
  normalized.reserve(train_scenes.size());
  for (const auto& s : train_scenes) {
    if (!s.has_future) throw std::invalid_argument("train: training scenes need futures");
    normalized.push_back(data::normalize_scene(s));
  }

  const bool to_disk = !artifacts.run_dir.empty();
  std::ofstream csv;
  if (to_disk) {
    std::filesystem::create_directories(artifacts.run_dir / "checkpoints");
    csv.open(artifacts.run_dir / kLossCsv, std::ios::binary | std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot write loss CSV in " + artifacts.run_dir.string());
    csv << "step,lr,train_loss,val_WSADE,val_WSFDE\n";
  }

  auto& params = model.params().entries();
  AdamState adam(params);
  nn::Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  BatchSampler sampler(normalized.size(), config.batch_size);
  TrainResult result;

  for (std::size_t step = 1; step <= config.max_steps; ++step) {
    std::vector<data::Scene> batch;
    for (auto k : sampler.next(rng)) {
      batch.push_back(config.augment ? data::random_rotation(normalized[k], rng) : normalized[k]);
    }
    const auto input = model::assemble_input(batch, config.model);
    model::ForwardContext ctx;
    ctx.training = true;
    ctx.rng = &rng;
    const auto pred = model.predict_teacher_forced(input, ctx);
    auto loss = l2_loss(pred, input.future, input.future_valid);
    const double loss_value = loss.item();
    if (!std::isfinite(loss_value)) throw DivergenceError(step, result.last_checkpoint);

    model.params().zero_grad();
    loss.backward();
    if (config.clip_norm) clip_grad_norm(params, *config.clip_norm);
    const double lr = lr_schedule(step, config.model.d_model, config.warmup_steps);
    adam_step(params, adam, lr);

    LossRecord row{step, lr, loss_value, std::nullopt, std::nullopt};
    const bool last = step == config.max_steps;
    if ((config.eval_interval > 0 && step % config.eval_interval == 0) || last) {
      auto evaluation = eval::evaluate(eval::model_predictor(model), val_scenes);
      row.val_wsade = evaluation.report.wsade;
      row.val_wsfde = evaluation.report.wsfde;
      if (last) result.final_validation = evaluation.report;
    }
    result.history.push_back(row);
    if (to_disk) {
      write_loss_row(csv, row);
      csv.flush();
      if (config.checkpoint_interval > 0 && step % config.checkpoint_interval == 0) {
        const auto path = checkpoint_path(artifacts.run_dir, step);
        model::save_model(path, model);
        result.last_checkpoint = path;
      }
    }
    if (artifacts.log && (last || (config.log_interval > 0 && step % config.log_interval == 0))) {
      *artifacts.log << "step " << step << "  lr " << data::format_double(lr) << "  loss "
                     << data::format_double(loss_value);
      if (row.val_wsade) {
        *artifacts.log << "  val WSADE " << data::format_double(*row.val_wsade) << "  WSFDE "
                       << data::format_double(*row.val_wsfde);
      }
      *artifacts.log << '\n';
    }
    result.steps = step;
  }

  if (to_disk) {
    const auto path = artifacts.run_dir / kFinalCheckpoint;
    model::save_model(path, model);
    result.last_checkpoint = path;
  }
  return result;
}

}  // namespace trajformer::training
