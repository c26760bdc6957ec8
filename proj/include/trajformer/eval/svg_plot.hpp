#pragma once

#include <iosfwd>

#include "trajformer/data/scene.hpp"
#include "trajformer/model/network.hpp"

namespace trajformer::eval {

struct PlotOptions {
  double width_px = 640.0;
  double height_px = 640.0;
  double margin_px = 24.0;
  bool show_ground_truth = true;
};

/// One <g> per agent: observed (solid), ground truth (dashed), predicted
/// (dotted), stroke colour by category. Coordinates are global.
void write_svg_plot(std::ostream& out, const data::Scene& scene, const model::Forecast& forecast,
                    const PlotOptions& options = {});

const char* category_color(data::Category c);

}  // namespace trajformer::eval
