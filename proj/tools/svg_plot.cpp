#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace intent::cli {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Box {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  void add(const core::Points<double>& p) {
    if (p.rows() == 0) return;
    x0 = std::min(x0, p.col(0).minCoeff());
    x1 = std::max(x1, p.col(0).maxCoeff());
    y0 = std::min(y0, p.col(1).minCoeff());
    y1 = std::max(y1, p.col(1).maxCoeff());
  }
};

void polyline(std::ostream& out, const core::Points<double>& p, const Box& box, double scale, double ox, double oy,
              const char* cls, const char* colour, const char* dash) {
  if (p.rows() == 0) return;
  out << "    <polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"";
  if (dash) out << " stroke-dasharray=\"" << dash << '"';
  out << " points=\"";
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    // SVG y grows downwards; flip so that +y points up.
    const double x = ox + (p(i, 0) - box.x0) * scale;
    const double y = oy - (p(i, 1) - box.y0) * scale;
    out << (i ? " " : "") << num(x) << ',' << num(y);
  }
  out << "\"/>\n";
}

}  // namespace

void write_svg(std::ostream& out, const std::vector<PlotWindow>& windows, const PlotStyle& style) {
  const int n = static_cast<int>(windows.size());
  const int cols = style.columns > 0 ? style.columns : std::max(1, static_cast<int>(std::ceil(std::sqrt(n))));
  const int rows = std::max(1, (n + cols - 1) / cols);
  const double side = style.panel;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(cols * side) << "\" height=\""
      << num(rows * side) << "\" viewBox=\"0 0 " << num(cols * side) << ' ' << num(rows * side) << "\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int k = 0; k < n; ++k) {
    const auto& w = windows[static_cast<std::size_t>(k)];
    Box box;
    box.add(w.observation);
    box.add(w.truth);
    box.add(w.prediction);
    const double inner = side - 2 * style.margin;
    const double extent = std::max({box.x1 - box.x0, box.y1 - box.y0, 1e-9});
    const double scale = std::isfinite(extent) ? inner / extent : 1.0;
    const double px = (k % cols) * side, py = (k / cols) * side;
    // Centre the data inside the panel.
    const double ox = px + style.margin + (inner - (box.x1 - box.x0) * scale) / 2;
    const double oy = py + side - style.margin - (inner - (box.y1 - box.y0) * scale) / 2;

    out << "  <g class=\"window\" id=\"window-" << k << "\">\n"
        << "    <title>" << escape(w.title) << "</title>\n"
        << "    <rect x=\"" << num(px + 1) << "\" y=\"" << num(py + 1) << "\" width=\"" << num(side - 2)
        << "\" height=\"" << num(side - 2) << "\" fill=\"none\" stroke=\"#ccc\"/>\n"
        << "    <text x=\"" << num(px + 4) << "\" y=\"" << num(py + 12) << "\" font-size=\"9\" fill=\"#555\">"
        << escape(w.title) << "</text>\n";
    if (std::isfinite(extent)) {
      polyline(out, w.observation, box, scale, ox, oy, "observation", "#1f77b4", nullptr);
      polyline(out, w.truth, box, scale, ox, oy, "truth", "#2ca02c", "6,3");
      polyline(out, w.prediction, box, scale, ox, oy, "prediction", "#d62728", "1.5,3");
    }
    out << "  </g>\n";
  }
  out << "</svg>\n";
}

}  // namespace intent::cli
