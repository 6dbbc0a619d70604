#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "intent/core/trajectory.hpp"

namespace intent::cli {

struct PlotWindow {
  std::string title;
  core::Points<double> observation;
  core::Points<double> truth;       // may be empty
  core::Points<double> prediction;  // may be empty
};

struct PlotStyle {
  double panel = 220;  // panel side in px
  double margin = 14;
  int columns = 0;     // 0: roughly square grid
};

/// One <g> per window on a grid of panels, each scaled to fit its own
/// points. Observation is solid, ground truth dashed, prediction dotted.
/// Empty segments are left out.
void write_svg(std::ostream& out, const std::vector<PlotWindow>& windows, const PlotStyle& style = {});

}  // namespace intent::cli
