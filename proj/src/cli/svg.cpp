#include "rwgd/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rwgd/cli/csv.hpp"
#include "rwgd/errors.hpp"

namespace rwgd::cli {

namespace {

constexpr double kWidth = 760, kHeight = 480;
constexpr double kLeft = 80, kRight = 200, kTop = 40, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;

  bool valid(double v) const { return std::isfinite(v) && (!log || v > 0); }
  double map(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return hi > lo ? (map(v) - lo) / (hi - lo) : 0.5; }
};

Axis fit_axis(const std::vector<const std::vector<double>*>& data, bool log) {
  Axis a{log};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* v : data) {
    for (double x : *v) {
      if (!a.valid(x)) continue;
      lo = std::min(lo, a.map(x));
      hi = std::max(hi, a.map(x));
    }
  }
  if (!std::isfinite(lo)) return a;
  if (log) {
    lo = std::floor(lo);
    hi = std::ceil(hi);
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.log) {
    const double step = std::max(1.0, std::ceil((a.hi - a.lo) / 8));
    for (double e = a.lo; e <= a.hi + 1e-9; e += step) out.push_back(e);
    return out;
  }
  const double raw = (a.hi - a.lo) / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double step = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
  for (double t = std::ceil(a.lo / step) * step; t <= a.hi + 1e-9 * step; t += step) out.push_back(t);
  return out;
}

std::string label(const Axis& a, double t) {
  if (a.log) return "1e" + format_number(t);
  std::ostringstream s;
  s << t;
  return s.str();
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

}  // namespace

std::string render_svg(const Plot& plot) {
  std::vector<const std::vector<double>*> xs, ys;
  for (const auto& s : plot.series) {
    xs.push_back(&s.x);
    ys.push_back(&s.y);
  }
  const Axis ax = fit_axis(xs, plot.log_x), ay = fit_axis(ys, plot.log_y);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double v) { return kLeft + ax.frac(v) * pw; };
  const auto py = [&](double v) { return kTop + (1 - ay.frac(v)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
    << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(ax)) {
    const double x = kLeft + (ax.hi > ax.lo ? (t - ax.lo) / (ax.hi - ax.lo) : 0.5) * pw;
    o << "<line x1=\"" << x << "\" y1=\"" << kTop + ph << "\" x2=\"" << x << "\" y2=\"" << kTop + ph + 5
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << x << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << label(ax, t)
      << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = kTop + (1 - (ay.hi > ay.lo ? (t - ay.lo) / (ay.hi - ay.lo) : 0.5)) * ph;
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\"" << kLeft + pw << "\" y2=\"" << y
      << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << label(ay, t) << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
    << escape(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(plot.y_label) << "</text>\n";

  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const Series& ser = plot.series[s];
    const char* color = kColors[s % std::size(kColors)];
    const std::string dash = ser.dashed ? " stroke-dasharray=\"6,4\"" : "";
    std::ostringstream pts;
    std::size_t count = 0;
    const auto flush = [&] {
      if (count > 1) {
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << dash << " points=\""
          << pts.str() << "\"/>\n";
      }
      pts.str("");
      count = 0;
    };
    const std::size_t len = std::min(ser.x.size(), ser.y.size());
    for (std::size_t i = 0; i < len; ++i) {
      if (!ax.valid(ser.x[i]) || !ay.valid(ser.y[i])) {
        flush();
        continue;
      }
      pts << (count ? " " : "") << px(ser.x[i]) << "," << py(ser.y[i]);
      ++count;
    }
    flush();
    const double ly = kTop + 10 + 18 * static_cast<double>(s);
    o << "<line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 40 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << "/>\n";
    o << "<text x=\"" << kLeft + pw + 46 << "\" y=\"" << ly + 4 << "\">" << escape(ser.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::filesystem::path& path, const Plot& plot) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << render_svg(plot);
}

}  // namespace rwgd::cli
