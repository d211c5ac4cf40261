// reproduce.hpp — figure pipelines behind `nvdac reproduce <id>`.

#pragma once

#include "svg.hpp"

#include <nvdac/analysis.hpp>
#include <nvdac/config.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace nvdac::tool {

const std::vector<std::string>& figure_ids();

// Writes fig<id>.svg and fig<id>.csv into `out_dir` and prints one line per
// headline number. Returns true when every headline lies inside its band.
// Throws ValidationError for an unknown id.
bool reproduce(const std::string& id, const Config& cfg, const std::string& out_dir, int threads,
               std::ostream& out);

// Model curve of a fit on a dense grid spanning `x` (for plot overlays).
// `model` is lorentzian, damped_cosine or exponential.
Series fit_curve(const std::string& model, const FitResult& fit, const std::vector<double>& x,
                 const std::string& label = "fit");

Series data_series(const Spectrum& s, const std::string& label = "");

} // namespace nvdac::tool
