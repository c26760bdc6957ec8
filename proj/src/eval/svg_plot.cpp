#include "trajformer/eval/svg_plot.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace trajformer::eval {

const char* category_color(data::Category c) {
  switch (c) {
    case data::Category::SmallVehicle: return "#1f77b4";
    case data::Category::BigVehicle: return "#17becf";
    case data::Category::Pedestrian: return "#d62728";
    case data::Category::Cyclist: return "#2ca02c";
    case data::Category::Other: return "#7f7f7f";
  }
  return "#000000";
}

namespace {

struct Bounds {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();
  void add(data::Point2 p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
};

using Polyline = std::vector<data::Point2>;

}  // namespace

void write_svg_plot(std::ostream& out, const data::Scene& scene, const model::Forecast& forecast,
                    const PlotOptions& options) {
  const std::size_t n = scene.num_agents();
  const bool gt = options.show_ground_truth && scene.has_future;
  std::vector<Polyline> observed(n), truth(n), predicted(n);
  Bounds b;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < scene.t_obs; ++t)
      if (scene.present(t, i)) observed[i].push_back(data::to_global(scene, scene.position(t, i)));
    const auto last = data::to_global(scene, scene.last_observed(i));
    if (gt) {
      truth[i].push_back(last);
      for (std::size_t t = 0; t < scene.t_pred; ++t)
        if (scene.present(scene.t_obs + t, i))
          truth[i].push_back(data::to_global(scene, scene.position(scene.t_obs + t, i)));
    }
    predicted[i].push_back(last);
    for (std::size_t t = 0; t < forecast.t_pred; ++t)
      if (forecast.valid[t * n + i]) predicted[i].push_back(forecast.at(t, i));
    for (const auto* line : {&observed[i], &truth[i], &predicted[i]})
      for (const auto& p : *line) b.add(p);
  }
  if (!(b.min_x <= b.max_x)) b = Bounds{0.0, 0.0, 1.0, 1.0};
  const double span = std::max({b.max_x - b.min_x, b.max_y - b.min_y, 1.0});
  const double inner = std::min(options.width_px, options.height_px) - 2.0 * options.margin_px;
  const double scale = inner / span;
  // y grows upward in the world and downward in SVG
  auto px = [&](data::Point2 p) {
    return std::pair{options.margin_px + (p.x - b.min_x) * scale,
                     options.height_px - options.margin_px - (p.y - b.min_y) * scale};
  };
  auto points = [&](const Polyline& line) {
    std::string s;
    for (const auto& p : line) {
      const auto [x, y] = px(p);
      if (!s.empty()) s += ' ';
      s += data::format_double(x) + "," + data::format_double(y);
    }
    return s;
  };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width_px
      << "\" height=\"" << options.height_px << "\" viewBox=\"0 0 " << options.width_px << ' '
      << options.height_px << "\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const char* color = category_color(scene.agents[i].category);
    out << "  <g id=\"agent-" << scene.agents[i].id << "\" stroke=\"" << color
        << "\" fill=\"none\" stroke-width=\"2\">\n";
    out << "    <polyline class=\"observed\" points=\"" << points(observed[i]) << "\"/>\n";
    if (gt)
      out << "    <polyline class=\"ground-truth\" stroke-dasharray=\"6,4\" points=\""
          << points(truth[i]) << "\"/>\n";
    out << "    <polyline class=\"predicted\" stroke-dasharray=\"1,3\" stroke-linecap=\"round\" "
           "points=\""
        << points(predicted[i]) << "\"/>\n";
    const auto [x, y] = px(predicted[i].back());
    out << "    <circle cx=\"" << data::format_double(x) << "\" cy=\"" << data::format_double(y)
        << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    out << "  </g>\n";
  }
  out << "</svg>\n";
}

}  // namespace trajformer::eval
