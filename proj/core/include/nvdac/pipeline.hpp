// pipeline.hpp — simulate -> fit -> extract chains shared by the CLI and the
// acceptance checks.

#pragma once

#include "nvdac/analysis.hpp"
#include "nvdac/config.hpp"
#include "nvdac/simulation.hpp"

#include <cstdint>
#include <vector>

namespace nvdac {

// Pulsed NMR spectra of both nuclear lines (m_S = 0 and m_S = -1).
struct NmrPair {
    Spectrum ms0;
    Spectrum ms1;
};

NmrPair expected_nmr_pair(const Simulator& sim, int threads = 0);
NmrPair noisy_nmr_pair(const NmrPair& expected, std::uint64_t seed);

// Single-Lorentzian fits of both lines and the |Q|, |A_par| extraction. The
// field is taken as known exactly. Throws InitializationError or
// ValidationError when a line cannot be fitted or a fit does not converge.
ExtractionRecord extract_record(const NmrPair& spectra, double pressure_gpa, double field_gauss, double gamma_n);

struct PressureSeries {
    std::vector<double> pressures;
    std::vector<NmrPair> spectra;          // noisy spectra as fitted
    std::vector<ExtractionRecord> records;
    Trend q_trend;                         // |Q| versus pressure
    Trend a_trend;                         // |A_par| versus pressure
};

// Runs both NMR presets at every pressure (noise stream derived from the config
// seed and the pressure index), fits, extracts and regresses. Needs at least
// three pressures; pressures outside the model range raise RangeError.
PressureSeries run_pressure_series(const Config& cfg, const std::vector<double>& pressures, int threads = 0);

// Ramsey trace with the final pi/2 phase alternated and subtracted: a damped
// cosine around zero whose envelope decays with T2n*.
Spectrum expected_fid_difference(const Simulator& sim, int threads = 0);

// Nuclear Rabi trace minus an off-resonant reference (RF detuned by
// `reference_detuning`) of identical pulse lengths. The reference carries the
// electron-T1 fluorescence drift accumulated during long RF pulses, so the
// difference is a damped cosine around zero.
Spectrum expected_rabi_n_difference(const Simulator& sim, double rf_rabi, int threads = 0,
                                    double reference_detuning = 1.0e6);

} // namespace nvdac
