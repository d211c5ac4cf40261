#include "reproduce.hpp"

#include <nvdac/errors.hpp>
#include <nvdac/linalg.hpp>
#include <nvdac/pipeline.hpp>
#include <nvdac/presets.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace nvdac::tool {

namespace {

constexpr double kFigurePressure = 0.6;          // GPa, single-pressure figures
constexpr double kOdmrPressure = 16.6;           // GPa, ODMR figure
const std::vector<double> kSeriesPressures{0.6, 6.9, 13.5, 16.6};

std::string num(double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

// One headline number with its acceptance band, printed in display units.
struct Headline {
    std::string name;
    double value;
    double lo;
    double hi;
    std::string unit;
    double scale{1.0};  // display = SI * scale

    bool pass() const { return std::isfinite(value) && value >= lo && value <= hi; }
};

bool report(std::ostream& out, const std::string& id, const std::vector<Headline>& lines) {
    bool ok = true;
    for (const auto& h : lines) {
        char buf[256];
        const double c = 0.5 * (h.lo + h.hi) * h.scale;
        const double w = 0.5 * (h.hi - h.lo) * h.scale;
        std::snprintf(buf, sizeof buf, "fig%s: %s = %.6g %s (band %.6g +/- %.4g %s) %s\n", id.c_str(),
                      h.name.c_str(), h.value * h.scale, h.unit.c_str(), c, w, h.unit.c_str(),
                      h.pass() ? "PASS" : "FAIL");
        out << buf;
        ok &= h.pass();
    }
    return ok;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + p.string() + "' for writing");
    f << text;
}

std::string spectrum_rows(const Spectrum& s, const std::string& prefix) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i)
        out += prefix + num(s.x[i]) + ',' + num(s.y[i]) + ',' + num(s.sigma[i]) + '\n';
    return out;
}

std::string spectrum_csv(const Spectrum& s) {
    std::ostringstream os;
    write_csv(os, s);
    return os.str();
}

double band_rel(double center, double rel) { return center * rel; }

// ---------------------------------------------------------------- figures

bool fig2b(const Config& cfg, const std::filesystem::path& dir, int threads, std::ostream& out) {
    constexpr double kRabi = 62.0e6;
    const Simulator sim(cfg.context(kFigurePressure));
    const Spectrum s = add_shot_noise(
        sim.expected_sweep(preset("rabi_e", sim, {{"mw_rabi", kRabi}}), "rabi_e", threads),
        derive_seed(cfg.rng_seed, 0x2b));
    const FitResult fit = fit_damped_cosine(s);
    write_text(dir / "fig2b.csv", spectrum_csv(s));
    write_svg((dir / "fig2b.svg").string(),
              Plot{"Electron Rabi oscillation", "MW pulse length (ns)", "Relative fluorescence", 1e9, 1.0,
                   {data_series(s, "data"), fit_curve("damped_cosine", fit, s.x)}});
    return report(out, "2b", {{"electron Rabi frequency", fit.converged ? fit.value("frequency") : NAN,
                               kRabi - band_rel(kRabi, 0.005), kRabi + band_rel(kRabi, 0.005), "MHz", 1e-6}});
}

bool fig2c(const Config& cfg, const std::filesystem::path& dir, int threads, std::ostream& out) {
    Config aligned = cfg;
    aligned.field = FieldVector(cfg.field.magnitude());
    const Simulator sim(aligned.context(kOdmrPressure));
    const Spectrum s = add_shot_noise(sim.expected_sweep(preset("odmr_cw", sim), "odmr_cw", threads),
                                      derive_seed(cfg.rng_seed, 0x2c));
    write_text(dir / "fig2c.csv", spectrum_csv(s));
    double dips = 0.0, d_center = NAN, splitting = NAN;
    FitResult fit;
    try {
        fit = fit_lorentzian(s, 4);
        if (fit.converged) {
            dips = 4.0;
            const double lo = fit.value("center_0");
            const double hi = fit.value("center_3");
            d_center = 0.5 * (lo + hi);
            splitting = hi - lo;
        }
    } catch (const InitializationError&) {
    }
    Plot plot{"ODMR, field aligned with one NV axis", "MW frequency (MHz)", "Relative fluorescence", 1e-6, 1.0,
              {data_series(s, "data")}};
    if (fit.converged) plot.series.push_back(fit_curve("lorentzian", fit, s.x));
    write_svg((dir / "fig2c.svg").string(), plot);
    const double two_gb = 2.0 * sim.context().params.gamma_e * aligned.field.magnitude();
    return report(out, "2c",
                  {{"fitted dips", dips, 4.0, 4.0, "", 1.0},
                   {"zero-field splitting D at 16.6 GPa", d_center, 3.116e9 - 2e6, 3.116e9 + 2e6, "GHz", 1e-9},
                   {"outer line splitting", splitting, two_gb - 1e6, two_gb + 1e6, "MHz", 1e-6}});
}

PressureSeries series(const Config& cfg, int threads) { return run_pressure_series(cfg, kSeriesPressures, threads); }

bool fig3c(const Config& cfg, const std::filesystem::path& dir, int threads, std::ostream& out) {
    const PressureSeries ps = series(cfg, threads);
    std::string csv = "pressure_gpa,line,frequency_hz,signal,sigma\n";
    Plot plot{"Pulsed NMR of 14N under pressure", "RF frequency (MHz)", "Relative fluorescence", 1e-6, 1.0, {}};
    for (std::size_t i = 0; i < ps.pressures.size(); ++i) {
        const std::string p = num(ps.pressures[i]);
        csv += spectrum_rows(ps.spectra[i].ms0, p + ",ms0,");
        csv += spectrum_rows(ps.spectra[i].ms1, p + ",ms1,");
        Series a = data_series(ps.spectra[i].ms0, p + " GPa");
        Series b = data_series(ps.spectra[i].ms1, "");
        plot.series.push_back(std::move(a));
        plot.series.push_back(std::move(b));
    }
    write_text(dir / "fig3c.csv", csv);
    write_svg((dir / "fig3c.svg").string(), plot);
    const ExtractionRecord& lo = ps.records.front();
    const ExtractionRecord& hi = ps.records.back();
    return report(out, "3c",
                  {{"|Q| at 0.6 GPa", lo.q_abs.value, 4.94e6 - 10e3, 4.94e6 + 10e3, "MHz", 1e-6},
                   {"|A_par| at 0.6 GPa", lo.a_par_abs.value, 2.16e6 - 10e3, 2.16e6 + 10e3, "MHz", 1e-6},
                   {"|Q| at 16.6 GPa", hi.q_abs.value, 4.89e6 - 25e3, 4.89e6 + 25e3, "MHz", 1e-6},
                   {"|A_par| at 16.6 GPa", hi.a_par_abs.value, 2.10e6 - 25e3, 2.10e6 + 25e3, "MHz", 1e-6}});
}

bool fig3d(const Config& cfg, const std::filesystem::path& dir, int threads, std::ostream& out) {
    const PressureSeries ps = series(cfg, threads);
    std::ostringstream os;
    write_records_csv(os, ps.records);
    write_text(dir / "fig3d.csv", os.str());
    auto trend_series = [&](const Trend& t, const std::string& label) {
        Series s{label, {}, {}, {}, false};
        for (double p : {ps.pressures.front(), ps.pressures.back()}) {
            s.x.push_back(p);
            s.y.push_back(t.intercept.value + t.slope.value * p);
        }
        return s;
    };
    Series q{"|Q|", {}, {}, {}, true}, a{"|A_par|", {}, {}, {}, true};
    for (const auto& r : ps.records) {
        q.x.push_back(r.pressure_gpa);
        q.y.push_back(r.q_abs.value - ps.records.front().q_abs.value);
        q.err.push_back(r.q_abs.sigma);
        a.x.push_back(r.pressure_gpa);
        a.y.push_back(r.a_par_abs.value - ps.records.front().a_par_abs.value);
        a.err.push_back(r.a_par_abs.sigma);
    }
    Trend q0 = ps.q_trend, a0 = ps.a_trend;
    q0.intercept.value -= ps.records.front().q_abs.value;
    a0.intercept.value -= ps.records.front().a_par_abs.value;
    write_svg((dir / "fig3d.svg").string(),
              Plot{"Quadrupole and hyperfine shifts versus pressure", "Pressure (GPa)",
                   "Shift from lowest pressure (kHz)", 1.0, 1e-3,
                   {q, a, trend_series(q0, "|Q| linear fit"), trend_series(a0, "|A_par| linear fit")}});
    return report(out, "3d",
                  {{"|dQ/dP|", std::abs(ps.q_trend.slope.value), 3.1e3, 3.9e3, "kHz/GPa", 1e-3},
                   {"|dA_par/dP|", std::abs(ps.a_trend.slope.value), 3.8e3, 6.0e3, "kHz/GPa", 1e-3}});
}

bool fig4a(const Config& cfg, const std::filesystem::path& dir, int threads, std::ostream& out) {
    const Simulator sim(cfg.context(kFigurePressure));
    std::string csv = "rf_rabi_hz,time_s,signal,sigma\n";
    Plot plot{"14N Rabi oscillation at several RF powers (minus off-resonant reference)", "RF pulse length (us)",
              "Fluorescence difference", 1e6, 1.0, {}};
    std::vector<Headline> lines;
    std::uint64_t stream = 0x4a0;
    for (double rabi : {20e3, 35e3, 50e3}) {
        const Spectrum s = add_shot_noise(expected_rabi_n_difference(sim, rabi, threads),
                                          derive_seed(cfg.rng_seed, stream++));
        csv += spectrum_rows(s, num(rabi) + ',');
        const FitResult fit = fit_damped_cosine(s);
        plot.series.push_back(data_series(s, num(rabi * 1e-3) + " kHz"));
        plot.series.push_back(fit_curve("damped_cosine", fit, s.x, ""));
        lines.push_back({"nuclear Rabi frequency at " + num(rabi * 1e-3) + " kHz drive",
                         fit.converged ? fit.value("frequency") : NAN, rabi * 0.97, rabi * 1.03, "kHz", 1e-3});
        if (fit.converged) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "fig4a: envelope decay at %g kHz drive = %.4g us\n", rabi * 1e-3,
                          fit.value("decay_time") * 1e6);
            out << buf;
        }
    }
    write_text(dir / "fig4a.csv", csv);
    write_svg((dir / "fig4a.svg").string(), plot);
    return report(out, "4a", lines);
}

bool fig4b(const Config& cfg, const std::filesystem::path& dir, int threads, std::ostream& out) {
    const Simulator sim(cfg.context(kFigurePressure));
    const Spectrum s =
        add_shot_noise(expected_fid_difference(sim, threads), derive_seed(cfg.rng_seed, 0x4b));
    const FitResult fit = fit_damped_cosine(s);
    write_text(dir / "fig4b.csv", spectrum_csv(s));
    write_svg((dir / "fig4b.svg").string(),
              Plot{"14N free induction decay (phase-alternated difference)", "Free evolution time (us)",
                   "Fluorescence difference", 1e6, 1.0,
                   {data_series(s, "data"), fit_curve("damped_cosine", fit, s.x)}});
    return report(out, "4b", {{"T2n*", fit.converged ? fit.value("decay_time") : NAN, 60e-6, 80e-6, "us", 1e6}});
}

bool fig4c(const Config& cfg, const std::filesystem::path& dir, int threads, std::ostream& out) {
    const Simulator sim(cfg.context(kFigurePressure));
    const Spectrum s = add_shot_noise(sim.expected_sweep(preset("t1_e", sim), "t1_e", threads),
                                      derive_seed(cfg.rng_seed, 0x4c));
    const FitResult fit = fit_exponential(s);
    write_text(dir / "fig4c.csv", spectrum_csv(s));
    write_svg((dir / "fig4c.svg").string(),
              Plot{"Electron spin relaxation", "Delay (us)", "Relative fluorescence", 1e6, 1.0,
                   {data_series(s, "data"), fit_curve("exponential", fit, s.x)}});
    return report(out, "4c", {{"T1e", fit.converged ? fit.value("decay_time") : NAN, 223e-6, 285e-6, "us", 1e6}});
}

} // namespace

const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids{"2b", "2c", "3c", "3d", "4a", "4b", "4c"};
    return ids;
}

bool reproduce(const std::string& id, const Config& cfg, const std::string& out_dir, int threads,
               std::ostream& out) {
    using Fn = bool (*)(const Config&, const std::filesystem::path&, int, std::ostream&);
    static const std::vector<std::pair<std::string, Fn>> table{{"2b", fig2b}, {"2c", fig2c}, {"3c", fig3c},
                                                              {"3d", fig3d}, {"4a", fig4a}, {"4b", fig4b},
                                                              {"4c", fig4c}};
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == id; });
    if (it == table.end()) {
        std::string list;
        for (const auto& v : figure_ids()) list += (list.empty() ? "" : ", ") + v;
        throw ValidationError("unknown figure id '" + id + "' (valid: " + list + ")");
    }
    std::filesystem::create_directories(out_dir);
    return it->second(cfg, out_dir, threads, out);
}

Series data_series(const Spectrum& s, const std::string& label) {
    return Series{label, s.x, s.y, s.sigma, true};
}

Series fit_curve(const std::string& model, const FitResult& fit, const std::vector<double>& x,
                 const std::string& label) {
    Series s{label, {}, {}, {}, false};
    if (!fit.converged || x.empty()) return s;
    constexpr int kPoints = 600;
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    for (int i = 0; i < kPoints; ++i) {
        const double t = lo + (hi - lo) * i / (kPoints - 1);
        double y = 0.0;
        if (model == "lorentzian") {
            y = lorentzian_model(t, fit.params);
        } else if (model == "damped_cosine") {
            y = fit.value("offset") + fit.value("amplitude") * std::exp(-t / fit.value("decay_time")) *
                                          std::cos(kTwoPi * fit.value("frequency") * t + fit.value("phase"));
        } else if (model == "exponential") {
            y = fit.value("offset") + fit.value("amplitude") * std::exp(-t / fit.value("decay_time"));
        } else {
            throw ValidationError("unknown model '" + model + "'");
        }
        s.x.push_back(t);
        s.y.push_back(y);
    }
    return s;
}

} // namespace nvdac::tool
