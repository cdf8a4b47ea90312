#include <betacfg/svg.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace betacfg {

SvgPlot::SvgPlot(double width, double height)
    : width_(width), height_(height) {}

void SvgPlot::set_title(const std::string& title) { title_ = title; }

void SvgPlot::set_axis_labels(const std::string& x, const std::string& y) {
  xlabel_ = x;
  ylabel_ = y;
}

void SvgPlot::add_scatter(const Matrix& points, const std::string& color,
                          double radius, double opacity,
                          const std::string& label) {
  scatters_.push_back({points, color, radius, opacity, label});
}

void SvgPlot::add_line(const std::vector<double>& x,
                       const std::vector<double>& y, const std::string& color,
                       double stroke_width, const std::string& label,
                       bool dashed) {
  if (x.size() != y.size())
    throw std::invalid_argument("line coordinate lengths differ");
  lines_.push_back({x, y, color, stroke_width, label, dashed});
}

void SvgPlot::add_annotation(const std::string& text) {
  annotations_.push_back(text);
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// tick spacing of the form {1,2,5} * 10^k covering the range with ~5 ticks
double tick_step(double range) {
  if (!(range > 0.0)) return 1.0;
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  if (frac < 1.5) return mag;
  if (frac < 3.5) return 2.0 * mag;
  if (frac < 7.5) return 5.0 * mag;
  return 10.0 * mag;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace

void SvgPlot::write(const std::string& path) const {
  // data bounds
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  auto grow = [&](double x, double y) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  };
  for (const Scatter& s : scatters_)
    for (Index j = 0; j < s.points.cols(); ++j)
      grow(s.points(0, j), s.points(1, j));
  for (const Line& l : lines_)
    for (size_t i = 0; i < l.x.size(); ++i) grow(l.x[i], l.y[i]);

  const bool empty = !(xmin <= xmax);
  if (empty) {
    xmin = ymin = 0.0;
    xmax = ymax = 1.0;
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double padx = 0.05 * (xmax - xmin);
  const double pady = 0.05 * (ymax - ymin);
  xmin -= padx;
  xmax += padx;
  ymin -= pady;
  ymax += pady;

  const double ml = 64, mr = 18, mt = title_.empty() ? 18 : 40, mb = 48;
  const double pw = width_ - ml - mr, ph = height_ - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open '" + path + "' for writing");

  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
    << "\" height=\"" << height_ << "\" viewBox=\"0 0 " << width_ << " "
    << height_ << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (!title_.empty())
    f << "<text x=\"" << width_ / 2
      << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
         "font-family=\"sans-serif\">"
      << escape(title_) << "</text>\n";

  // frame
  f << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // ticks + grid
  const double sx = tick_step(xmax - xmin);
  for (double x = std::ceil(xmin / sx) * sx; x <= xmax + 1e-12 * sx; x += sx) {
    f << "<line x1=\"" << px(x) << "\" y1=\"" << mt << "\" x2=\"" << px(x)
      << "\" y2=\"" << mt + ph << "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
    f << "<text x=\"" << px(x) << "\" y=\"" << mt + ph + 16
      << "\" text-anchor=\"middle\" font-size=\"11\" "
         "font-family=\"sans-serif\">"
      << fmt(x) << "</text>\n";
  }
  const double sy = tick_step(ymax - ymin);
  for (double y = std::ceil(ymin / sy) * sy; y <= ymax + 1e-12 * sy; y += sy) {
    f << "<line x1=\"" << ml << "\" y1=\"" << py(y) << "\" x2=\"" << ml + pw
      << "\" y2=\"" << py(y) << "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
    f << "<text x=\"" << ml - 6 << "\" y=\"" << py(y) + 4
      << "\" text-anchor=\"end\" font-size=\"11\" "
         "font-family=\"sans-serif\">"
      << fmt(y) << "</text>\n";
  }

  if (!xlabel_.empty())
    f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height_ - 10
      << "\" text-anchor=\"middle\" font-size=\"13\" "
         "font-family=\"sans-serif\">"
      << escape(xlabel_) << "</text>\n";
  if (!ylabel_.empty())
    f << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" "
         "font-family=\"sans-serif\" transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">" << escape(ylabel_) << "</text>\n";

  for (const Scatter& s : scatters_) {
    f << "<g fill=\"" << s.color << "\" fill-opacity=\"" << s.opacity
      << "\">\n";
    for (Index j = 0; j < s.points.cols(); ++j)
      f << "<circle cx=\"" << fmt(px(s.points(0, j))) << "\" cy=\""
        << fmt(py(s.points(1, j))) << "\" r=\"" << s.radius << "\"/>\n";
    f << "</g>\n";
  }

  for (const Line& l : lines_) {
    f << "<polyline fill=\"none\" stroke=\"" << l.color
      << "\" stroke-width=\"" << l.stroke_width << "\"";
    if (l.dashed) f << " stroke-dasharray=\"6 4\"";
    f << " points=\"";
    for (size_t i = 0; i < l.x.size(); ++i) {
      if (i) f << " ";
      f << fmt(px(l.x[i])) << "," << fmt(py(l.y[i]));
    }
    f << "\"/>\n";
  }

  // legend
  double ly = mt + 14;
  auto legend_entry = [&](const std::string& color, const std::string& label,
                          bool line) {
    if (label.empty()) return;
    if (line)
      f << "<line x1=\"" << ml + pw - 140 << "\" y1=\"" << ly - 4
        << "\" x2=\"" << ml + pw - 120 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    else
      f << "<circle cx=\"" << ml + pw - 130 << "\" cy=\"" << ly - 4
        << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    f << "<text x=\"" << ml + pw - 112 << "\" y=\"" << ly
      << "\" font-size=\"12\" font-family=\"sans-serif\">" << escape(label)
      << "</text>\n";
    ly += 18;
  };
  for (const Scatter& s : scatters_) legend_entry(s.color, s.label, false);
  for (const Line& l : lines_) legend_entry(l.color, l.label, true);

  if (empty && annotations_.empty())
    f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"14\" "
         "font-family=\"sans-serif\" fill=\"#999\">no data</text>\n";
  double ay = mt + ph / 2;
  for (const std::string& a : annotations_) {
    f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << ay
      << "\" text-anchor=\"middle\" font-size=\"14\" "
         "font-family=\"sans-serif\" fill=\"#999\">"
      << escape(a) << "</text>\n";
    ay += 18;
  }

  f << "</svg>\n";
  if (!f) throw DataError("write failed for '" + path + "'");
}

}  // namespace betacfg
