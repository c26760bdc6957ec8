#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "trajformer/data/scene.hpp"
#include "trajformer/eval/metrics.hpp"
#include "trajformer/model/network.hpp"
#include "trajformer/training/train_config.hpp"

namespace trajformer::training {

struct LossRecord {
  std::size_t step = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  // Filled on validation steps only.
  std::optional<double> val_wsade, val_wsfde;
};

struct TrainArtifacts {
  // Empty: nothing is written to disk.
  std::filesystem::path run_dir;
  std::ostream* log = nullptr;
};

struct TrainResult {
  std::vector<LossRecord> history;
  std::size_t steps = 0;
  std::filesystem::path last_checkpoint;
  std::optional<eval::MetricsReport> final_validation;
};

/// The loss became non-finite. The last checkpoint written before that step
/// is left in place.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, std::filesystem::path last_checkpoint);
  std::size_t step() const { return step_; }
  const std::filesystem::path& last_checkpoint() const { return last_checkpoint_; }

 private:
  std::size_t step_;
  std::filesystem::path last_checkpoint_;
};

inline constexpr const char* kLossCsv = "loss.csv";
inline constexpr const char* kFinalCheckpoint = "model.ckpt";

/// Teacher-forced training with Adam and the warmup schedule. Scenes are in
/// global coordinates; an empty validation set validates on the training
/// scenes. Fully determined by config.seed and the inputs.
TrainResult train(model::TrajectoryModel& model, std::span<const data::Scene> train_scenes,
                  std::span<const data::Scene> val_scenes, const TrainConfig& config,
                  const TrainArtifacts& artifacts = {});

/// Columns: step, lr, train_loss, val_WSADE, val_WSFDE.
void write_loss_csv(std::ostream& out, std::span<const LossRecord> rows);
void write_loss_row(std::ostream& out, const LossRecord& row);

}  // namespace trajformer::training
