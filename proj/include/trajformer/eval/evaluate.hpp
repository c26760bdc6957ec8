#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trajformer/eval/metrics.hpp"

namespace trajformer::eval {

using Predictor = std::function<model::Forecast(const data::Scene&)>;

struct SceneResult {
  std::size_t index = 0;
  long first_frame_id = 0;
  std::size_t agents = 0;
  double ade = 0.0;
  double fde = 0.0;
};

struct EvaluationResult {
  MetricsReport report;
  std::vector<SceneResult> scenes;
  std::vector<model::Forecast> forecasts;
};

/// Runs the predictor on every scene and pools the errors per category.
EvaluationResult evaluate(const Predictor& predictor, std::span<const data::Scene> scenes,
                          bool keep_forecasts = false);

Predictor model_predictor(const model::TrajectoryModel& model);

/// Columns: WSADE, ADEv, ADEp, ADEb, WSFDE, FDEv, FDEp, FDEb
void write_report_table(std::ostream& out, const MetricsReport& report, const std::string& label);
void write_report_csv(std::ostream& out, const MetricsReport& report, const std::string& label);
void write_scene_csv(std::ostream& out, std::span<const SceneResult> rows);

/// Forecast rows in the ingestion text format, frame ids continuing after the
/// last observed frame.
std::vector<data::FrameRecords> forecast_to_records(const data::Scene& scene,
                                                    const model::Forecast& forecast);

}  // namespace trajformer::eval
