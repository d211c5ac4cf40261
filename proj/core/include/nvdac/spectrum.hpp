// spectrum.hpp — sampled spectra / time traces and their CSV form.
//
//   # mode=nmr_pulsed_ms0 pressure_gpa=0.6 field_gauss=460
//   x,y,sigma
//   4.98e6,0.91,0.0071
//
// x is strictly increasing, sigma >= 0. NaN metadata means "unknown".

#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace nvdac {

struct Spectrum {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> sigma;
    std::string mode;
    double pressure_gpa{std::numeric_limits<double>::quiet_NaN()};
    double field_gauss{std::numeric_limits<double>::quiet_NaN()};

    std::size_t size() const noexcept { return x.size(); }
    void validate() const;
};

// Time traces share the representation; x is time in seconds.
using TimeTrace = Spectrum;

// a - b on a shared grid, sigmas added in quadrature.
Spectrum difference(const Spectrum& a, const Spectrum& b);

void write_csv(std::ostream& os, const Spectrum& s);
void write_csv(const std::string& path, const Spectrum& s);

// Throws ParseError (line/column) on malformed input and ValidationError on
// broken invariants. A missing sigma column reads as zero.
Spectrum read_csv(std::istream& is);
Spectrum read_csv(const std::string& path);

} // namespace nvdac
