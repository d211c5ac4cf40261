#include "svg.hpp"

#include <nvdac/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace nvdac::tool {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string fmt(double v, int digits = 2) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string tick_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", std::abs(v) < 1e-12 ? 0.0 : v);
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

// Round step from the 1-2-5 sequence giving roughly `n` intervals.
double nice_step(double span, int n) {
    const double raw = span / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0})
        if (m * mag >= raw) return m * mag;
    return 10.0 * mag;
}

struct Range {
    double lo{std::numeric_limits<double>::infinity()};
    double hi{-std::numeric_limits<double>::infinity()};
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(hi >= lo)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-300) {
            const double pad = std::abs(lo) > 0 ? 0.05 * std::abs(lo) : 1.0;
            lo -= pad, hi += pad;
        }
        const double pad = 0.04 * (hi - lo);
        lo -= pad, hi += pad;
    }
};

} // namespace

std::string render_svg(const Plot& plot) {
    Range xr, yr;
    for (const auto& s : plot.series) {
        for (double x : s.x) xr.add(x * plot.x_scale);
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            const double e = i < s.err.size() ? s.err[i] : 0.0;
            yr.add((s.y[i] - e) * plot.y_scale);
            yr.add((s.y[i] + e) * plot.y_scale);
        }
    }
    xr.finish();
    yr.finish();
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x * plot.x_scale - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return kTop + ph - (y * plot.y_scale - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth, 0) << "\" height=\""
       << fmt(kHeight, 0) << "\" viewBox=\"0 0 " << fmt(kWidth, 0) << ' ' << fmt(kHeight, 0)
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(plot.title) << "</text>\n";
    os << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw) << "\" height=\""
       << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int axis = 0; axis < 2; ++axis) {
        const Range& r = axis == 0 ? xr : yr;
        const double step = nice_step(r.hi - r.lo, axis == 0 ? 8 : 6);
        for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step) {
            if (axis == 0) {
                const double x = kLeft + (v - r.lo) / (r.hi - r.lo) * pw;
                os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(x) << "\" y2=\""
                   << fmt(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
                os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kTop + ph + 19) << "\" text-anchor=\"middle\">"
                   << tick_label(v) << "</text>\n";
            } else {
                const double y = kTop + ph - (v - r.lo) / (r.hi - r.lo) * ph;
                os << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft)
                   << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
                os << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">"
                   << tick_label(v) << "</text>\n";
            }
        }
    }
    os << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 15)
       << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
    os << "<text x=\"20\" y=\"" << fmt(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
       << fmt(kTop + ph / 2) << ")\">" << escape(plot.y_label) << "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const Series& s = plot.series[k];
        const char* color = kColors[k % kColors.size()];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.markers) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.y[i])) continue;
                if (i < s.err.size() && s.err[i] > 0.0)
                    os << "<line x1=\"" << fmt(px(s.x[i])) << "\" y1=\"" << fmt(py(s.y[i] - s.err[i]))
                       << "\" x2=\"" << fmt(px(s.x[i])) << "\" y2=\"" << fmt(py(s.y[i] + s.err[i]))
                       << "\" stroke=\"" << color << "\" stroke-width=\"0.8\"/>\n";
                os << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i])) << "\" r=\"2.2\" fill=\""
                   << color << "\"/>\n";
            }
        } else if (n > 0) {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < n; ++i) os << (i ? " " : "") << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
            os << "\"/>\n";
        }
        if (!s.label.empty()) {
            const double ly = kTop + 16.0 + 16.0 * static_cast<double>(k);
            os << "<rect x=\"" << fmt(kLeft + pw - 170) << "\" y=\"" << fmt(ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
               << color << "\"/>\n";
            os << "<text x=\"" << fmt(kLeft + pw - 154) << "\" y=\"" << fmt(ly) << "\">" << escape(s.label)
               << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

void write_svg(const std::string& path, const Plot& plot) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + path + "' for writing");
    f << render_svg(plot);
}

} // namespace nvdac::tool
