#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace slowman::cli {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 150, kTop = 40, kBottom = 60;
const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;  // in transformed units

  [[nodiscard]] double t(double v) const { return log ? std::log10(v) : v; }
  [[nodiscard]] bool usable(double v) const { return std::isfinite(v) && (!log || v > 0); }

  void fit(double a, double b) {
    lo = a, hi = b;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = log ? 0.5 : std::max(1e-3, 0.05 * std::abs(lo));
      lo -= pad, hi += pad;
    }
    if (log) {
      lo = std::floor(lo), hi = std::ceil(hi);
    } else {
      const double pad = 0.04 * (hi - lo);
      lo -= pad, hi += pad;
    }
  }

  [[nodiscard]] std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double d = lo; d <= hi + 1e-9; d += 1) out.push_back(d);
      return out;
    }
    const double raw = (hi - lo) / 5;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) { step = m * mag; break; }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step)
      out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return out;
  }

  [[nodiscard]] std::string tick_label(double v) const { return log ? "1e" + label(v) : label(v); }
};

}  // namespace

std::string line_plot(const PlotSpec& spec, const std::vector<Series>& series) {
  Axis ax{spec.log_x}, ay{spec.log_y};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      x0 = std::min(x0, ax.t(s.x[i])), x1 = std::max(x1, ax.t(s.x[i]));
      y0 = std::min(y0, ay.t(s.y[i])), y1 = std::max(y1, ay.t(s.y[i]));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  ax.fit(x0, x1);
  ay.fit(y0, y1);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double v) { return kLeft + (ax.t(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  const auto py = [&](double v) { return kTop + ph - (ay.t(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : ax.ticks()) {
    const double x = kLeft + (v - ax.lo) / (ax.hi - ax.lo) * pw;
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x) << "\" y2=\"" << num(kTop + ph)
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
       << ax.tick_label(v) << "</text>\n";
  }
  for (double v : ay.ticks()) {
    const double y = kTop + ph - (v - ay.lo) / (ay.hi - ay.lo) * ph;
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\"" << num(y)
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << ay.tick_label(v)
       << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 16) << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << num(kTop + ph / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kColours[k % std::size(kColours)];
    std::ostringstream pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      if (s.markers)
        os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\"" << colour
           << "\"/>\n";
      else
        pts << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
    }
    if (!s.markers)
      os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"" << pts.str()
         << "\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << num(kLeft + pw + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(kLeft + pw + 30)
       << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(kLeft + pw + 34) << "\" y=\"" << num(ly) << "\">" << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace slowman::cli
