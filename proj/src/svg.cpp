#include "rnls/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rnls {

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel, int width, int height)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)),
      width_(width), height_(height) {}

void SvgPlot::add_line(const std::vector<double>& x, const std::vector<double>& y,
                       const std::string& color) {
    series_.push_back({x, y, color, false});
}

void SvgPlot::add_points(const std::vector<double>& x, const std::vector<double>& y,
                         const std::string& color) {
    series_.push_back({x, y, color, true});
}

void SvgPlot::add_vline(double x, const std::string& color) { vlines_.push_back({x, color}); }
void SvgPlot::add_hline(double y, const std::string& color) { hlines_.push_back({y, color}); }

std::string SvgPlot::render() const {
    const double ml = 70, mr = 20, mt = 40, mb = 55;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto tx = [&](double v) { return logx_ ? std::log10(std::max(v, 1e-300)) : v; };
    auto ty = [&](double v) { return logy_ ? std::log10(std::max(v, 1e-300)) : v; };
    for (const Series& s : series_)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    for (auto& [v, c] : vlines_) { xmin = std::min(xmin, tx(v)); xmax = std::max(xmax, tx(v)); }
    for (auto& [v, c] : hlines_) { ymin = std::min(ymin, ty(v)); ymax = std::max(ymax, ty(v)); }
    if (!std::isfinite(xmin) || xmin == xmax) { xmin -= 0.5; xmax += 0.5; }
    if (!std::isfinite(ymin) || ymin == ymax) { ymin -= 0.5; ymax += 0.5; }
    double xpad = 0.04 * (xmax - xmin), ypad = 0.06 * (ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

    auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * (width_ - ml - mr); };
    auto py = [&](double v) {
        return height_ - mb - (ty(v) - ymin) / (ymax - ymin) * (height_ - mt - mb);
    };

    std::ostringstream os;
    os.precision(8);
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width_ << "' height='" << height_
       << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << width_ / 2 << "' y='22' text-anchor='middle' font-size='15'>" << title_
       << "</text>\n";
    // Axes.
    os << "<line x1='" << ml << "' y1='" << height_ - mb << "' x2='" << width_ - mr << "' y2='"
       << height_ - mb << "' stroke='black'/>\n";
    os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << height_ - mb
       << "' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
        double fx = xmin + (xmax - xmin) * i / 5.0;
        double fy = ymin + (ymax - ymin) * i / 5.0;
        double gx = ml + (width_ - ml - mr) * i / 5.0;
        double gy = height_ - mb - (height_ - mt - mb) * i / 5.0;
        os << "<line x1='" << gx << "' y1='" << height_ - mb << "' x2='" << gx << "' y2='"
           << height_ - mb + 4 << "' stroke='black'/>\n";
        os << "<text x='" << gx << "' y='" << height_ - mb + 18
           << "' text-anchor='middle' font-size='10'>" << (logx_ ? std::pow(10.0, fx) : fx)
           << "</text>\n";
        os << "<line x1='" << ml - 4 << "' y1='" << gy << "' x2='" << ml << "' y2='" << gy
           << "' stroke='black'/>\n";
        os << "<text x='" << ml - 8 << "' y='" << gy + 3
           << "' text-anchor='end' font-size='10'>" << (logy_ ? std::pow(10.0, fy) : fy)
           << "</text>\n";
    }
    os << "<text x='" << (ml + width_ - mr) / 2 << "' y='" << height_ - 12
       << "' text-anchor='middle' font-size='12'>" << xlabel_ << "</text>\n";
    os << "<text x='16' y='" << (mt + height_ - mb) / 2
       << "' text-anchor='middle' font-size='12' transform='rotate(-90 16 "
       << (mt + height_ - mb) / 2 << ")'>" << ylabel_ << "</text>\n";
    for (auto& [v, c] : vlines_)
        os << "<line x1='" << px(v) << "' y1='" << mt << "' x2='" << px(v) << "' y2='"
           << height_ - mb << "' stroke='" << c << "' stroke-dasharray='5,4'/>\n";
    for (auto& [v, c] : hlines_)
        os << "<line x1='" << ml << "' y1='" << py(v) << "' x2='" << width_ - mr << "' y2='"
           << py(v) << "' stroke='" << c << "' stroke-dasharray='5,4'/>\n";
    for (const Series& s : series_) {
        if (s.points) {
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                os << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i])
                   << "' r='3' fill='" << s.color << "'/>\n";
            }
        } else {
            os << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            }
            os << "'/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace rnls
