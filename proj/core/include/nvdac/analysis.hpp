// analysis.hpp — curve fitting and parameter extraction.
//
// All fitters minimise sum(((y - model) / sigma)^2) with Levenberg-Marquardt.
// When every sigma is zero the fit is unweighted and uncertainties are scaled
// by the residual variance (flag "unweighted"). Non-converged results keep the
// last iterate but report infinite sigmas and an empty covariance.

#pragma once

#include "nvdac/linalg.hpp"
#include "nvdac/spectrum.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nvdac {

struct FitResult {
    std::vector<std::string> names;
    RVector params;
    RVector sigmas;
    RMatrix covariance;
    double reduced_chi2{0.0};
    bool converged{false};
    int iterations{0};
    std::vector<std::string> flags;

    double value(std::string_view name) const;
    double sigma(std::string_view name) const;
    bool has_flag(std::string_view flag) const;
};

// ---------------------------------------------------------------- Lorentzian

// y = baseline - sum_i a_i (w_i/2)^2 / ((x - x0_i)^2 + (w_i/2)^2)
// Parameters: baseline, then amplitude_i, center_i, fwhm_i with i ordered by center.
struct LorentzianInit {
    double baseline{0.0};
    std::vector<double> amplitudes;
    std::vector<double> centers;
    std::vector<double> fwhms;
};

double lorentzian_model(double x, const RVector& params);

// Throws ValidationError for too few points and InitializationError when fewer
// than n_dips significant minima are found.
FitResult fit_lorentzian(const Spectrum& spec, int n_dips, const std::optional<LorentzianInit>& init = {});

// ---------------------------------------------------------------- damped cosine

// y = offset + amplitude exp(-t / decay_time) cos(2 pi frequency t + phase)
struct CosineInit {
    std::optional<double> frequency;
    std::optional<double> decay_time;
    std::optional<double> amplitude;
    std::optional<double> offset;
    std::optional<double> phase;
};

// decay_time is capped at 100 times the trace span; hitting the cap sets the
// flag "decay_at_bound". Throws InitializationError for traces without a
// dominant frequency.
FitResult fit_damped_cosine(const TimeTrace& trace, const CosineInit& init = {});

// ---------------------------------------------------------------- exponential

// y = offset + amplitude exp(-t / decay_time)
struct ExponentialInit {
    std::optional<double> offset;
    std::optional<double> amplitude;
    std::optional<double> decay_time;
    bool fix_offset{false};
};

// A trace without a resolvable decay reports flag "unidentifiable".
FitResult fit_exponential(const TimeTrace& trace, const ExponentialInit& init = {});

// ---------------------------------------------------------------- extraction

struct Measured {
    double value{0.0};
    double sigma{0.0};
};

struct QaExtraction {
    Measured q_abs;
    Measured a_par_abs;
    bool plausibility_warning{false};  // |A| outside [1, 3] MHz
};

// |Q| = |f_rf0 - gamma_n b|, |A| = |f_rf1 - f_rf0|, uncertainties in quadrature.
QaExtraction extract_qa(const Measured& f_rf0, const Measured& f_rf1, const Measured& b_gauss, double gamma_n);

struct TrendPoint {
    double pressure_gpa{0.0};
    double value{0.0};
    double sigma{0.0};
};

struct Trend {
    Measured slope;
    Measured intercept;
    double reduced_chi2{0.0};
    bool weighted{true};
};

// Weighted least-squares line; ordinary least squares when any sigma is zero.
Trend linear_trend(const std::vector<TrendPoint>& points);

// Deepest dip relative to the fitted baseline; 0 when the fit finds no dip.
double spectrum_contrast(const FitResult& lorentzian);
// Fits one dip when possible; a spectrum without a significant dip gives 0.
double spectrum_contrast(const Spectrum& spec);

struct ExtractionRecord {
    double pressure_gpa{0.0};
    Measured f_rf0;
    Measured f_rf1;
    Measured q_abs;
    Measured a_par_abs;
    Measured fwhm0;
    Measured fwhm1;
};

void write_records_csv(std::ostream& os, const std::vector<ExtractionRecord>& records);

} // namespace nvdac
