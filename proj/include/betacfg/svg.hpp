#pragma once

#include <string>
#include <vector>

#include <betacfg/types.hpp>

namespace betacfg {

// Minimal self-contained SVG plotting: axes with round-number ticks, scatter
// layers, polylines and a legend. Output is deterministic.
class SvgPlot {
 public:
  SvgPlot(double width = 720, double height = 540);

  void set_title(const std::string& title);
  void set_axis_labels(const std::string& x, const std::string& y);

  void add_scatter(const Matrix& points, const std::string& color,
                   double radius, double opacity, const std::string& label);
  void add_line(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& color, double stroke_width,
                const std::string& label, bool dashed = false);
  void add_annotation(const std::string& text);

  void write(const std::string& path) const;

 private:
  struct Scatter {
    Matrix points;
    std::string color;
    double radius;
    double opacity;
    std::string label;
  };
  struct Line {
    std::vector<double> x, y;
    std::string color;
    double stroke_width;
    std::string label;
    bool dashed;
  };

  double width_, height_;
  std::string title_, xlabel_, ylabel_;
  std::vector<Scatter> scatters_;
  std::vector<Line> lines_;
  std::vector<std::string> annotations_;
};

}  // namespace betacfg
