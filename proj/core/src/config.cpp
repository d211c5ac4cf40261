#include "nvdac/config.hpp"

#include "nvdac/errors.hpp"
#include "nvdac/linalg.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace nvdac {

namespace {

struct Entry {
    std::function<double(const Config&)> get;
    std::function<void(Config&, double)> set;
};

// Field stored as (magnitude, theta, phi); the setters rebuild it.
void set_field(Config& c, int which, double v) {
    double m = c.field.magnitude(), th = c.field.theta(), ph = c.field.phi();
    if (which == 0) m = v;
    if (which == 1) th = v * kPi / 180.0;
    if (which == 2) ph = v * kPi / 180.0;
    c.field = FieldVector(m, th, ph);
}

#define NVDAC_MEMBER(prefix, path, name) \
    {prefix #name, {[](const Config& c) { return static_cast<double>(c.path.name); }, \
                    [](Config& c, double v) { c.path.name = v; }}}

const std::map<std::string, Entry>& table() {
    static const std::map<std::string, Entry> t = {
        NVDAC_MEMBER("pressure_model.", pressure_model, d_gs0),
        NVDAC_MEMBER("pressure_model.", pressure_model, d_slope),
        NVDAC_MEMBER("pressure_model.", pressure_model, q0),
        NVDAC_MEMBER("pressure_model.", pressure_model, q_slope),
        NVDAC_MEMBER("pressure_model.", pressure_model, a_par0),
        NVDAC_MEMBER("pressure_model.", pressure_model, a_slope),
        NVDAC_MEMBER("pressure_model.", pressure_model, width0),
        NVDAC_MEMBER("pressure_model.", pressure_model, width_slope),
        NVDAC_MEMBER("pressure_model.", pressure_model, p_min),
        NVDAC_MEMBER("pressure_model.", pressure_model, p_max),
        NVDAC_MEMBER("pressure_model.", pressure_model.template_params, d_es),
        NVDAC_MEMBER("pressure_model.", pressure_model.template_params, a_perp),
        NVDAC_MEMBER("pressure_model.", pressure_model.template_params, a_par_es),
        NVDAC_MEMBER("pressure_model.", pressure_model.template_params, a_perp_es),
        NVDAC_MEMBER("constants.", pressure_model.template_params, gamma_e),
        NVDAC_MEMBER("constants.", pressure_model.template_params, gamma_n),
        NVDAC_MEMBER("optical.", optical, pump_rate),
        NVDAC_MEMBER("optical.", optical, cw_pump_rate),
        NVDAC_MEMBER("optical.", optical, radiative_rate),
        NVDAC_MEMBER("optical.", optical, isc_rate_ms0),
        NVDAC_MEMBER("optical.", optical, isc_rate_ms1),
        NVDAC_MEMBER("optical.", optical, singlet_decay),
        NVDAC_MEMBER("optical.", optical, singlet_branching_ms0),
        NVDAC_MEMBER("optical.", optical, counts_rate_bright),
        NVDAC_MEMBER("optical.", optical, contrast_nuclear),
        NVDAC_MEMBER("optical.", optical, contrast_electron),
        NVDAC_MEMBER("noise.", noise, t1e),
        NVDAC_MEMBER("noise.", noise, t2e_star),
        NVDAC_MEMBER("noise.", noise, t2n_star),
        NVDAC_MEMBER("noise.", noise, t1n),
        {"noise.shot_noise",
         {[](const Config& c) { return c.noise.shot_noise ? 1.0 : 0.0; },
          [](Config& c, double v) {
              if (v != 0.0 && v != 1.0) throw ValidationError("must be 0 or 1");
              c.noise.shot_noise = v != 0.0;
          }}},
        {"field.magnitude", {[](const Config& c) { return c.field.magnitude(); },
                             [](Config& c, double v) { set_field(c, 0, v); }}},
        {"field.theta_deg", {[](const Config& c) { return c.field.theta() * 180.0 / kPi; },
                             [](Config& c, double v) { set_field(c, 1, v); }}},
        {"field.phi_deg", {[](const Config& c) { return c.field.phi() * 180.0 / kPi; },
                           [](Config& c, double v) { set_field(c, 2, v); }}},
        {"rng_seed", {[](const Config& c) { return static_cast<double>(c.rng_seed); },
                      [](Config& c, double v) {
                          if (!(v >= 0.0 && v < 9007199254740992.0) || v != std::floor(v))
                              throw ValidationError("must be a non-negative integer below 2^53");
                          c.rng_seed = static_cast<std::uint64_t>(v);
                      }}},
    };
    return t;
}

#undef NVDAC_MEMBER

void validate_all(const Config& c) {
    c.pressure_model.validate();
    c.optical.validate();
    c.noise.validate();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string num(double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

} // namespace

SimulationContext Config::context(double pressure_gpa) const {
    SimulationContext ctx = SimulationContext::at_pressure(pressure_model, pressure_gpa, field);
    ctx.optical = optical;
    ctx.noise = noise;
    ctx.seed = rng_seed;
    return ctx;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, e] : table()) k.push_back(name);
        return k;
    }();
    return keys;
}

Config parse_config(std::string_view text) {
    Config c;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, 1);
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const std::size_t value_col = static_cast<std::size_t>(value.data() - line.data()) + 1;
        if (key.empty()) throw ParseError("missing key before '='", line_no, 1);
        const auto it = table().find(key);
        if (it == table().end()) throw ParseError("unknown config key '" + key + "'", line_no, 1);
        if (!seen.insert(key).second) throw ParseError("duplicate config key '" + key + "'", line_no, 1);

        double v = 0.0;
        std::string_view digits = value;
        if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (value.empty() || ec != std::errc() || ptr != digits.data() + digits.size())
            throw ParseError("config key '" + key + "': expected a number, got '" + std::string(value) + "'",
                             line_no, value_col);

        try {
            it->second.set(c, v);
            validate_all(c);
        } catch (const ValidationError& e) {
            throw ValidationError("config key '" + key + "' (line " + std::to_string(line_no) +
                                  ") = " + std::string(value) + ": " + e.what());
        }
    }
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("config not found: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const Config& c) {
    std::string out;
    for (const auto& [name, e] : table()) out += name + " = " + num(e.get(c)) + "\n";
    return out;
}

} // namespace nvdac
