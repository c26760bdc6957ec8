#include <cstdio>
#include <ostream>
#include <string>

#include "trajformer/eval/evaluate.hpp"

namespace trajformer::eval {

namespace {

std::string cell(double v, bool present) {
  if (!present) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

void write_report_table(std::ostream& out, const MetricsReport& r, const std::string& label) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %9s %9s %9s %9s %9s %9s %9s %9s\n", "Method", "WSADE",
                "ADEv", "ADEp", "ADEb", "WSFDE", "FDEv", "FDEp", "FDEb");
  out << line;
  std::snprintf(line, sizeof(line), "%-14s %9s %9s %9s %9s %9s %9s %9s %9s\n", label.c_str(),
                cell(r.wsade, true).c_str(), cell(r.vehicle.ade, r.vehicle.present()).c_str(),
                cell(r.pedestrian.ade, r.pedestrian.present()).c_str(),
                cell(r.cyclist.ade, r.cyclist.present()).c_str(), cell(r.wsfde, true).c_str(),
                cell(r.vehicle.fde, r.vehicle.present()).c_str(),
                cell(r.pedestrian.fde, r.pedestrian.present()).c_str(),
                cell(r.cyclist.fde, r.cyclist.present()).c_str());
  out << line;
  if (r.partial) out << "(weighted sums are partial: some categories have no samples)\n";
}

void write_report_csv(std::ostream& out, const MetricsReport& r, const std::string& label) {
  auto num = [](double v, bool present) {
    return present ? data::format_double(v) : std::string();
  };
  out << "method,WSADE,ADEv,ADEp,ADEb,WSFDE,FDEv,FDEp,FDEb,partial,scenes\n";
  out << label << ',' << num(r.wsade, true) << ',' << num(r.vehicle.ade, r.vehicle.present())
      << ',' << num(r.pedestrian.ade, r.pedestrian.present()) << ','
      << num(r.cyclist.ade, r.cyclist.present()) << ',' << num(r.wsfde, true) << ','
      << num(r.vehicle.fde, r.vehicle.present()) << ','
      << num(r.pedestrian.fde, r.pedestrian.present()) << ','
      << num(r.cyclist.fde, r.cyclist.present()) << ',' << (r.partial ? 1 : 0) << ','
      << r.scenes << '\n';
}

void write_scene_csv(std::ostream& out, std::span<const SceneResult> rows) {
  out << "scene,first_frame,agents,ade,fde\n";
  for (const auto& row : rows) {
    out << row.index << ',' << row.first_frame_id << ',' << row.agents << ','
        << data::format_double(row.ade) << ',' << data::format_double(row.fde) << '\n';
  }
}

}  // namespace trajformer::eval
