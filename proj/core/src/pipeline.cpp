#include "nvdac/pipeline.hpp"

#include "nvdac/errors.hpp"
#include "nvdac/presets.hpp"

namespace nvdac {

NmrPair expected_nmr_pair(const Simulator& sim, int threads) {
    NmrPair out;
    out.ms0 = sim.expected_sweep(preset("nmr_pulsed_ms0", sim), "nmr_pulsed_ms0", threads);
    out.ms1 = sim.expected_sweep(preset("nmr_pulsed_ms1", sim), "nmr_pulsed_ms1", threads);
    return out;
}

NmrPair noisy_nmr_pair(const NmrPair& expected, std::uint64_t seed) {
    return {add_shot_noise(expected.ms0, derive_seed(seed, 0)), add_shot_noise(expected.ms1, derive_seed(seed, 1))};
}

namespace {

FitResult fit_line(const Spectrum& s, const char* which) {
    FitResult r = fit_lorentzian(s, 1);
    if (!r.converged) throw ValidationError(std::string("Lorentzian fit of the ") + which + " line did not converge");
    return r;
}

Measured measured(const FitResult& r, const char* name) { return {r.value(name), r.sigma(name)}; }

} // namespace

ExtractionRecord extract_record(const NmrPair& spectra, double pressure_gpa, double field_gauss, double gamma_n) {
    const FitResult f0 = fit_line(spectra.ms0, "m_S = 0");
    const FitResult f1 = fit_line(spectra.ms1, "m_S = -1");
    ExtractionRecord rec;
    rec.pressure_gpa = pressure_gpa;
    rec.f_rf0 = measured(f0, "center_0");
    rec.f_rf1 = measured(f1, "center_0");
    rec.fwhm0 = measured(f0, "fwhm_0");
    rec.fwhm1 = measured(f1, "fwhm_0");
    const QaExtraction qa = extract_qa(rec.f_rf0, rec.f_rf1, {field_gauss, 0.0}, gamma_n);
    rec.q_abs = qa.q_abs;
    rec.a_par_abs = qa.a_par_abs;
    return rec;
}

PressureSeries run_pressure_series(const Config& cfg, const std::vector<double>& pressures, int threads) {
    if (pressures.size() < 3)
        throw ValidationError("pressure series needs at least 3 pressures for the regression, got " +
                              std::to_string(pressures.size()));
    // Range errors surface before any simulation time is spent.
    for (double p : pressures) (void)params_at(cfg.pressure_model, p);

    PressureSeries out;
    out.pressures = pressures;
    std::vector<TrendPoint> q, a;
    for (std::size_t i = 0; i < pressures.size(); ++i) {
        const Simulator sim(cfg.context(pressures[i]));
        NmrPair s = expected_nmr_pair(sim, threads);
        if (cfg.noise.shot_noise) s = noisy_nmr_pair(s, derive_seed(cfg.rng_seed, i));
        const ExtractionRecord rec =
            extract_record(s, pressures[i], cfg.field.magnitude(), sim.context().params.gamma_n);
        out.spectra.push_back(std::move(s));
        out.records.push_back(rec);
        q.push_back({rec.pressure_gpa, rec.q_abs.value, rec.q_abs.sigma});
        a.push_back({rec.pressure_gpa, rec.a_par_abs.value, rec.a_par_abs.sigma});
    }
    out.q_trend = linear_trend(q);
    out.a_trend = linear_trend(a);
    return out;
}

Spectrum expected_fid_difference(const Simulator& sim, int threads) {
    const PulseSequence seq = preset("fid_n", sim);
    return difference(sim.expected_sweep(seq, "fid_n", threads),
                      sim.expected_sweep(phase_alternated(seq), "fid_n", threads));
}

Spectrum expected_rabi_n_difference(const Simulator& sim, double rf_rabi, int threads, double reference_detuning) {
    const PulseSequence seq = preset("rabi_n", sim, {{"rf_rabi", rf_rabi}});
    PulseSequence ref = seq;
    for (Pulse& p : ref.pulses)
        if (p.kind == PulseKind::rf) p.frequency = Value::literal(p.frequency.resolve({}) + reference_detuning);
    return difference(sim.expected_sweep(seq, "rabi_n", threads), sim.expected_sweep(ref, "rabi_n", threads));
}

} // namespace nvdac
