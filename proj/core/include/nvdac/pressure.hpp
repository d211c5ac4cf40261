// pressure.hpp — linear pressure dependence of the spin Hamiltonian and the
// ruby R1 fluorescence pressure scale.

#pragma once

#include "nvdac/spinops.hpp"

namespace nvdac {

// Linear-in-pressure coefficients. q0 / a_par0 are magnitudes at P = 0 and the
// slopes act on those magnitudes; signs come from `template_params`.
struct PressureModel {
    double d_gs0{2.870e9};
    double d_slope{(3.116e9 - 2.870e9) / 16.6};   // Hz/GPa
    double q0{4.94e6 + 3.5e3 * 0.6};
    double q_slope{-3.5e3};
    double a_par0{2.16e6 + 4.9e3 * 0.6};
    double a_slope{-4.9e3};
    double width0{30.0e3};      // approximate, plot-read
    double width_slope{1.0e3};  // approximate, plot-read
    double p_min{0.0};
    double p_max{20.0};

    // Pressure-independent constants (d_es, a_perp, signs, gyromagnetic ratios).
    NVParams template_params{};

    void validate() const;
};

PressureModel default_paper_model();

// Throws RangeError outside [m.p_min, m.p_max].
NVParams params_at(const PressureModel& m, double pressure_gpa);

// NMR linewidth (FWHM, Hz) predicted by the width model.
double width_at(const PressureModel& m, double pressure_gpa);

struct RubyGauge {
    double lambda0{694.22};   // nm
    double a_coeff{1904.0};   // GPa
    double b_coeff{7.665};

    void validate() const;
};

// P = (A/B) [(lambda/lambda0)^B - 1]. Throws RangeError when lambda lies more
// than 0.05 nm below lambda0.
double ruby_pressure(const RubyGauge& g, double lambda_nm);

} // namespace nvdac
