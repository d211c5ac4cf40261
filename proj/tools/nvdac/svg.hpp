// svg.hpp — minimal deterministic SVG line/scatter plots.

#pragma once

#include <string>
#include <vector>

namespace nvdac::tool {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;   // optional error bars, same length as y
    bool markers{true};        // markers (data) or a polyline (model)
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    double x_scale{1.0};       // plotted x = x * x_scale
    double y_scale{1.0};
    std::vector<Series> series;
};

std::string render_svg(const Plot& plot);
void write_svg(const std::string& path, const Plot& plot);

} // namespace nvdac::tool
