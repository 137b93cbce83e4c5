#pragma once

#include <string>
#include <vector>

namespace rnls {

// Minimal SVG line/scatter plots for the report bundles. Every plotted
// series must also be written as CSV by the caller; these files are a
// convenience view, not the data of record.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel, int width = 720,
            int height = 460);

    void add_line(const std::vector<double>& x, const std::vector<double>& y,
                  const std::string& color);
    void add_points(const std::vector<double>& x, const std::vector<double>& y,
                    const std::string& color);
    void add_vline(double x, const std::string& color);
    void add_hline(double y, const std::string& color);
    void set_logx(bool on) { logx_ = on; }
    void set_logy(bool on) { logy_ = on; }

    std::string render() const;

private:
    struct Series {
        std::vector<double> x, y;
        std::string color;
        bool points = false;
    };
    std::string title_, xlabel_, ylabel_;
    int width_, height_;
    bool logx_ = false, logy_ = false;
    std::vector<Series> series_;
    std::vector<std::pair<double, std::string>> vlines_, hlines_;
};

} // namespace rnls
