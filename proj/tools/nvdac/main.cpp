// nvdac — command-line front end.
//
// Exit codes: 0 success, 1 acceptance failure or non-converged fit,
// 2 usage, parse or validation error.

#include "reproduce.hpp"
#include "svg.hpp"

#include <nvdac/config.hpp>
#include <nvdac/errors.hpp>
#include <nvdac/pipeline.hpp>
#include <nvdac/presets.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace nvdac;
using namespace nvdac::tool;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int threads{0};
};

Config load(const Globals& g) {
    Config cfg = g.config_path.empty() ? Config{} : load_config(g.config_path);
    if (g.seed) cfg.rng_seed = *g.seed;
    return cfg;
}

void print_seed(const Config& cfg) { std::cout << "seed = " << cfg.rng_seed << '\n'; }

std::string num(double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string preset_name;
    std::string sequence_path;
    double pressure{0.6};
    std::string out{"simulate.csv"};
    std::vector<std::string> overrides;
};

std::map<std::string, double> parse_overrides(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        double v = 0.0;
        if (eq == std::string::npos ||
            std::from_chars(item.data() + eq + 1, item.data() + item.size(), v).ptr != item.data() + item.size())
            throw ValidationError("--set expects key=number, got '" + item + "'");
        out[item.substr(0, eq)] = v;
    }
    return out;
}

void summarize(const std::string& name, const Spectrum& s, Plot& plot) {
    try {
        if (name == "rabi_e" || name == "rabi_n" || name == "fid_n") {
            const FitResult f = fit_damped_cosine(s);
            if (f.converged) {
                std::cout << "fitted frequency = " << num(f.value("frequency")) << " Hz +/- "
                          << num(f.sigma("frequency")) << '\n';
                std::cout << "fitted decay time = " << num(f.value("decay_time")) << " s +/- "
                          << num(f.sigma("decay_time")) << '\n';
                plot.series.push_back(fit_curve("damped_cosine", f, s.x));
            }
        } else if (name == "nmr_cw" || name == "nmr_pulsed_ms0" || name == "nmr_pulsed_ms1") {
            const FitResult f = fit_lorentzian(s, 1);
            if (f.converged) {
                std::cout << "fitted center = " << num(f.value("center_0")) << " Hz +/- "
                          << num(f.sigma("center_0")) << '\n';
                std::cout << "fitted FWHM = " << num(f.value("fwhm_0")) << " Hz +/- " << num(f.sigma("fwhm_0"))
                          << '\n';
                plot.series.push_back(fit_curve("lorentzian", f, s.x));
            }
        } else if (name == "t1_e") {
            const FitResult f = fit_exponential(s);
            if (f.converged) {
                std::cout << "fitted T1e = " << num(f.value("decay_time")) << " s +/- "
                          << num(f.sigma("decay_time")) << '\n';
                plot.series.push_back(fit_curve("exponential", f, s.x));
            }
        }
    } catch (const InitializationError& e) {
        std::cout << "fit skipped: " << e.what() << '\n';
    }
}

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
    const Config cfg = load(g);
    print_seed(cfg);
    if (a.preset_name.empty() == a.sequence_path.empty())
        throw ValidationError("simulate needs exactly one of --preset or --sequence");
    const Simulator sim(cfg.context(a.pressure));
    PulseSequence seq;
    std::string mode = a.preset_name;
    if (!a.preset_name.empty()) {
        seq = preset(a.preset_name, sim, parse_overrides(a.overrides));
    } else {
        std::ifstream f(a.sequence_path, std::ios::binary);
        if (!f) throw ValidationError("sequence file not found: " + a.sequence_path);
        std::ostringstream ss;
        ss << f.rdbuf();
        seq = parse_sequence(ss.str());
        mode = "custom";
    }
    const Spectrum s = sim.run_sweep(seq, mode, g.threads);
    write_csv(a.out, s);
    const bool time_axis = seq.sweep && seq.sweep->variable != "f";
    Plot plot{mode + " at " + num(a.pressure) + " GPa", time_axis ? "Time (s)" : "Frequency (Hz)",
              "Relative fluorescence", 1.0, 1.0, {data_series(s, "simulated")}};
    summarize(a.preset_name, s, plot);
    const std::string svg = fs::path(a.out).replace_extension(".svg").string();
    write_svg(svg, plot);
    std::cout << "wrote " << a.out << " and " << svg << " (" << s.size() << " points)\n";
    return kOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    std::string input;
    std::string model;
    std::string format{"json"};
    bool allow_nonconverged{false};
};

int cmd_fit(const Globals& g, const FitArgs& a) {
    const Config cfg = load(g);
    Spectrum s;
    try {
        s = read_csv(a.input);
    } catch (const ParseError& e) {
        throw ValidationError("malformed CSV at row " + std::to_string(e.line()) + ": " + e.message());
    }

    FitResult r;
    std::string model = a.model;
    if (model.rfind("lorentzian:", 0) == 0) {
        int n = 0;
        const std::string count = model.substr(11);
        if (std::from_chars(count.data(), count.data() + count.size(), n).ptr != count.data() + count.size() || n < 1)
            throw ValidationError("--model lorentzian:n needs a positive dip count, got '" + count + "'");
        r = fit_lorentzian(s, n);
    } else if (model == "damped_cosine") {
        r = fit_damped_cosine(s);
    } else if (model == "exponential") {
        r = fit_exponential(s);
    } else {
        throw ValidationError("unknown model '" + model + "' (expected lorentzian:n, damped_cosine or exponential)");
    }

    if (a.format == "json") {
        nlohmann::ordered_json j;
        j["seed"] = cfg.rng_seed;
        j["model"] = model;
        j["converged"] = r.converged;
        j["iterations"] = r.iterations;
        j["reduced_chi2"] = r.reduced_chi2;
        nlohmann::ordered_json params = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < r.names.size(); ++i) {
            const double sig = r.sigmas(static_cast<Eigen::Index>(i));
            params[r.names[i]] = {{"value", r.params(static_cast<Eigen::Index>(i))},
                                  {"sigma", std::isfinite(sig) ? nlohmann::ordered_json(sig) : nullptr}};
        }
        j["params"] = params;
        j["flags"] = r.flags;
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "# seed = " << cfg.rng_seed << '\n';
        std::cout << "# model = " << model << " converged = " << (r.converged ? 1 : 0)
                  << " reduced_chi2 = " << num(r.reduced_chi2) << '\n';
        std::cout << "name,value,sigma\n";
        for (std::size_t i = 0; i < r.names.size(); ++i)
            std::cout << r.names[i] << ',' << num(r.params(static_cast<Eigen::Index>(i))) << ','
                      << num(r.sigmas(static_cast<Eigen::Index>(i))) << '\n';
    }
    if (!r.converged && !a.allow_nonconverged) {
        std::cerr << "error: fit did not converge (use --allow-nonconverged to accept)\n";
        return kFail;
    }
    return kOk;
}

// ---------------------------------------------------------------- pressure-series

struct SeriesArgs {
    std::vector<double> pressures{0.6, 6.9, 13.5, 16.6};
    std::string out{"pressure_series"};
};

int cmd_pressure_series(const Globals& g, const SeriesArgs& a) {
    const Config cfg = load(g);
    print_seed(cfg);
    const PressureSeries ps = run_pressure_series(cfg, a.pressures, g.threads);
    fs::create_directories(a.out);
    {
        std::ofstream f(fs::path(a.out) / "records.csv", std::ios::binary);
        write_records_csv(f, ps.records);
    }
    {
        std::ofstream f(fs::path(a.out) / "trend.csv", std::ios::binary);
        f << "quantity,slope_hz_per_gpa,slope_sigma,intercept_hz,intercept_sigma,reduced_chi2\n";
        for (const auto& [name, t] : {std::pair{"q_abs", ps.q_trend}, std::pair{"a_par_abs", ps.a_trend}})
            f << name << ',' << num(t.slope.value) << ',' << num(t.slope.sigma) << ',' << num(t.intercept.value)
              << ',' << num(t.intercept.sigma) << ',' << num(t.reduced_chi2) << '\n';
    }
    Series q{"|Q| (kHz)", {}, {}, {}, true}, al{"|A_par| (kHz)", {}, {}, {}, true};
    for (const auto& r : ps.records) {
        q.x.push_back(r.pressure_gpa);
        q.y.push_back(r.q_abs.value - ps.records.front().q_abs.value);
        q.err.push_back(r.q_abs.sigma);
        al.x.push_back(r.pressure_gpa);
        al.y.push_back(r.a_par_abs.value - ps.records.front().a_par_abs.value);
        al.err.push_back(r.a_par_abs.sigma);
    }
    write_svg((fs::path(a.out) / "trend.svg").string(),
              Plot{"Pressure dependence", "Pressure (GPa)", "Shift from first pressure (kHz)", 1.0, 1e-3, {q, al}});
    for (const auto& r : ps.records)
        std::cout << "P = " << num(r.pressure_gpa) << " GPa: |Q| = " << fmt("%.1f", r.q_abs.value) << " +/- "
                  << fmt("%.1f", r.q_abs.sigma) << " Hz, |A_par| = " << fmt("%.1f", r.a_par_abs.value) << " +/- "
                  << fmt("%.1f", r.a_par_abs.sigma) << " Hz\n";
    std::cout << "dQ/dP = " << fmt("%.3f", ps.q_trend.slope.value * 1e-3) << " +/- "
              << fmt("%.3f", ps.q_trend.slope.sigma * 1e-3) << " kHz/GPa\n";
    std::cout << "dA_par/dP = " << fmt("%.3f", ps.a_trend.slope.value * 1e-3) << " +/- "
              << fmt("%.3f", ps.a_trend.slope.sigma * 1e-3) << " kHz/GPa\n";
    std::cout << "wrote " << (fs::path(a.out) / "trend.csv").string() << '\n';
    return kOk;
}

// ---------------------------------------------------------------- reproduce / validate-config

int cmd_reproduce(const Globals& g, const std::string& id, const std::string& out) {
    const Config cfg = load(g);
    print_seed(cfg);
    return reproduce(id, cfg, out, g.threads, std::cout) ? kOk : kFail;
}

int cmd_validate_config(const Globals& g, const std::string& path) {
    Config cfg = load_config(path);
    if (g.seed) cfg.rng_seed = *g.seed;
    print_seed(cfg);
    std::cout << "config ok: " << path << '\n' << render_config(cfg);
    return kOk;
}

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const RangeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nvdac: NV-center high-pressure NMR simulator"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "Configuration file (key = value)");
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides rng_seed)");
    app.add_option("--threads", g.threads, "Worker threads (default: NVDAC_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    // Options may also follow the subcommand.
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", g.config_path, "Configuration file (key = value)");
        sub->add_option("--seed", seed, "Random seed (overrides rng_seed)");
        sub->add_option("--threads", g.threads, "Worker threads")->check(CLI::NonNegativeNumber);
    };

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Simulate a preset or a sequence file");
    add_common(sim);
    sim->add_option("--preset", sim_args.preset_name, "Preset name");
    sim->add_option("--sequence", sim_args.sequence_path, "Pulse sequence file");
    sim->add_option("--pressure", sim_args.pressure, "Pressure (GPa)");
    sim->add_option("--out", sim_args.out, "Output CSV (an SVG is written next to it)");
    sim->add_option("--set", sim_args.overrides, "Preset override key=value (repeatable)");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit a spectrum or time trace CSV");
    add_common(fit);
    fit->add_option("input", fit_args.input, "Input CSV")->required();
    fit->add_option("--model", fit_args.model, "lorentzian:n | damped_cosine | exponential")->required();
    fit->add_option("--format", fit_args.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    fit->add_flag("--allow-nonconverged", fit_args.allow_nonconverged, "Exit 0 even if the fit did not converge");

    SeriesArgs series_args;
    auto* series = app.add_subcommand("pressure-series", "NMR extraction and linear trends over pressures");
    add_common(series);
    series->add_option("--pressures", series_args.pressures, "Comma-separated pressures (GPa)")->delimiter(',');
    series->add_option("--out", series_args.out, "Output directory");

    std::string figure, figure_out = ".";
    auto* rep = app.add_subcommand("reproduce", "Reproduce a figure: 2b 2c 3c 3d 4a 4b 4c");
    add_common(rep);
    rep->add_option("id", figure, "Figure id")->required();
    rep->add_option("--out", figure_out, "Output directory");

    std::string config_to_check;
    auto* val = app.add_subcommand("validate-config", "Check a configuration file");
    add_common(val);
    val->add_option("path", config_to_check, "Configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    bool seed_given = seed_opt->count() > 0;
    for (auto* sub : app.get_subcommands()) seed_given |= sub->get_option("--seed")->count() > 0;
    if (seed_given) g.seed = seed;

    if (sim->parsed()) return guarded([&] { return cmd_simulate(g, sim_args); });
    if (fit->parsed()) return guarded([&] { return cmd_fit(g, fit_args); });
    if (series->parsed()) return guarded([&] { return cmd_pressure_series(g, series_args); });
    if (rep->parsed()) return guarded([&] { return cmd_reproduce(g, figure, figure_out); });
    if (val->parsed()) return guarded([&] { return cmd_validate_config(g, config_to_check); });
    return kUsage;
}
