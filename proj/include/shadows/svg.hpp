#pragma once

// Static SVG line and region plots.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "shadows/errors.hpp"

namespace shadows::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct Rect {
  double x0, y0, x1, y1;
};

class Plot {
 public:
  Plot(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), xl_(std::move(x_label)), yl_(std::move(y_label)) {}

  void line(Series s) { lines_.push_back(std::move(s)); }
  void regions(std::string label, std::vector<Rect> r) {
    region_label_ = std::move(label);
    rects_ = std::move(r);
  }

  std::string render(int width = 720, int height = 480) const {
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    for (const auto& s : lines_)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
      }
    for (const auto& r : rects_) {
      x0 = std::min(x0, r.x0), x1 = std::max(x1, r.x1);
      y0 = std::min(y0, r.y0), y1 = std::max(y1, r.y1);
    }
    if (!(x0 < x1)) x0 -= 1, x1 += 1;
    if (!(y0 < y1)) y0 -= 1, y1 += 1;
    const double ml = 70, mr = 150, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return mt + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title_ << "</text>\n";
    for (const auto& r : rects_)
      o << "<rect x=\"" << px(r.x0) << "\" y=\"" << py(r.y1) << "\" width=\"" << std::max(0.5, px(r.x1) - px(r.x0))
        << "\" height=\"" << std::max(0.5, py(r.y0) - py(r.y1)) << "\" fill=\"#9ab\" stroke=\"none\"/>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
      o << "<text x=\"" << px(xv) << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">" << tick(xv)
        << "</text>\n";
      o << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
    }
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">" << xl_
      << "</text>\n";
    o << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << mt + ph / 2
      << ")\">" << yl_ << "</text>\n";
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    for (std::size_t k = 0; k < lines_.size(); ++k) {
      const auto& s = lines_[k];
      o << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colors[k % 6] << "\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << px(s.x[i]) << "," << py(s.y[i]) << " ";
      o << "\"/>\n";
      o << "<text x=\"" << ml + pw + 10 << "\" y=\"" << mt + 16 * (k + 1) << "\" fill=\"" << colors[k % 6] << "\">"
        << s.label << "</text>\n";
    }
    if (!rects_.empty())
      o << "<text x=\"" << ml + pw + 10 << "\" y=\"" << mt + 16 * (lines_.size() + 1) << "\" fill=\"#789\">"
        << region_label_ << "</text>\n";
    o << "</svg>\n";
    return o.str();
  }

  void write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw DomainError("cannot write plot to " + path);
    f << render();
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static std::string tick(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
  }

  std::string title_, xl_, yl_;
  std::vector<Series> lines_;
  std::vector<Rect> rects_;
  std::string region_label_;
};

}  // namespace shadows::svg
