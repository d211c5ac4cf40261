#include "nvdac/presets.hpp"

#include "nvdac/errors.hpp"

#include <charconv>
#include <cmath>
#include <set>

namespace nvdac {

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"odmr_cw", "rabi_e", "nmr_cw", "nmr_pulsed_ms0",
                                                "nmr_pulsed_ms1", "rabi_n", "fid_n", "t1_e"};
    return names;
}

Resonances resonances(const Simulator& sim) {
    const Hamiltonian& h = sim.ground_hamiltonian();
    const Eigensystem es = eigensystem(h);
    Resonances r;
    r.nmr_ms0 = std::abs(transition_frequency(h, es, {0, 1}, {0, 0}));
    r.nmr_ms1 = std::abs(transition_frequency(h, es, {-1, 1}, {-1, 0}));
    r.esr = std::abs(transition_frequency(h, es, {0, 1}, {-1, 1}));
    r.esr_upper = std::abs(transition_frequency(h, es, {0, 1}, {1, 1}));
    return r;
}

namespace {

std::string num(double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

class Options {
public:
    explicit Options(const std::map<std::string, double>& o) : o_(o) {
        static const std::set<std::string> known{"rf_rabi", "mw_rabi", "center", "span", "points", "start",
                                                 "stop",    "shots",   "laser",  "read", "detuning"};
        for (const auto& [k, v] : o)
            if (!known.contains(k)) throw ValidationError("unknown preset override '" + k + "'");
    }
    double get(const std::string& k, double fallback) const {
        const auto it = o_.find(k);
        return it == o_.end() ? fallback : it->second;
    }

    std::string sweep(const std::string& var, double center, double span, int points) const {
        const double c = get("center", center);
        const double sp = get("span", span);
        const double start = get("start", c - sp / 2.0);
        const double stop = get("stop", c + sp / 2.0);
        const double n = get("points", points);
        return "sweep " + var + " " + num(start) + " " + num(stop) + " " + num(std::round(n)) + "\n";
    }
    std::string range(const std::string& var, double start, double stop, int points) const {
        return "sweep " + var + " " + num(get("start", start)) + " " + num(get("stop", stop)) + " " +
               num(std::round(get("points", points))) + "\n";
    }

private:
    const std::map<std::string, double>& o_;
};

} // namespace

PulseSequence preset(std::string_view name, const Simulator& sim, const std::map<std::string, double>& overrides) {
    const Options o(overrides);
    const Resonances r = resonances(sim);
    const SimulationContext& ctx = sim.context();

    const std::string laser = "laser " + num(o.get("laser", 3e-6)) + "\n";
    const std::string read = "laser_read " + num(o.get("read", 3e-7)) + "\n";
    const std::string shots = "shots " + num(o.get("shots", 3e5)) + "\n";
    const std::string rf_rabi = num(o.get("rf_rabi", 25e3));
    const std::string mw_rabi = num(o.get("mw_rabi", 62e6));
    const std::string mw_pi = "mw " + num(r.esr) + " " + mw_rabi + " pi\n";

    std::string text;
    if (name == "odmr_cw") {
        const double d_center = 0.5 * (r.esr + r.esr_upper);
        const double half = 0.5 * (r.esr_upper - r.esr) + 150e6;
        text = "cw { laser; mw $f " + num(o.get("mw_rabi", 0.3e6)) + "; read " + num(o.get("read", 1.0)) + " }\n" +
               o.sweep("f", d_center, 2.0 * half, static_cast<int>(std::round(2.0 * half / 3e6)) + 1) +
               "shots " + num(o.get("shots", 1)) + "\n";
    } else if (name == "nmr_cw") {
        text = "cw { laser; rf $f " + num(o.get("rf_rabi", 10e3)) + "; read " + num(o.get("read", 1.0)) + " }\n" +
               o.sweep("f", r.nmr_ms0, 300e3, 151) + "shots " + num(o.get("shots", 1)) + "\n";
    } else if (name == "rabi_e") {
        text = laser + "mw " + num(r.esr) + " " + num(o.get("mw_rabi", 20e6)) + " $t\n" + read +
               o.range("t", 2e-9, 200e-9, 100) + shots;
    } else if (name == "nmr_pulsed_ms0") {
        text = laser + "rf $f " + rf_rabi + " pi\n" + read + o.sweep("f", r.nmr_ms0, 200e3, 151) + shots;
    } else if (name == "nmr_pulsed_ms1") {
        text = laser + mw_pi + "rf $f " + rf_rabi + " pi\n" + mw_pi + read + o.sweep("f", r.nmr_ms1, 200e3, 151) +
               shots;
    } else if (name == "rabi_n") {
        text = laser + "rf " + num(r.nmr_ms0) + " " + rf_rabi + " $t\n" + read + o.range("t", 1e-6, 200e-6, 100) +
               shots;
    } else if (name == "fid_n") {
        const double t2 = ctx.noise.t2n_star;
        const double detuning = o.get("detuning", 3.0 / (kTwoPi * t2));
        const std::string half = "rf " + num(r.nmr_ms0 + detuning) + " " + rf_rabi + " pi/2\n";
        text = laser + half + "wait $tau\n" + half + read + o.range("tau", 1e-6, 1e-6 + 4.0 * t2, 111) + shots;
    } else if (name == "t1_e") {
        text = laser + mw_pi + "wait $tau\n" + read + o.range("tau", 1e-6, 4.0 * ctx.noise.t1e, 100) +
               "shots " + num(o.get("shots", 1e6)) + "\n";
    } else {
        std::string list;
        for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
        throw ValidationError("unknown preset '" + std::string(name) + "' (known: " + list + ")");
    }
    return parse_sequence(text);
}

} // namespace nvdac
