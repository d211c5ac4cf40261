// config.hpp — run configuration: a flat `key = value` file with dotted
// section prefixes.
//
//   # comment
//   noise.t1e = 254e-6
//   field.magnitude = 460
//   rng_seed = 42
//
// Sections: pressure_model.*, optical.*, noise.*, field.* (magnitude in G,
// theta_deg, phi_deg), constants.* (gamma_e, gamma_n) and the top-level
// rng_seed. Unknown keys, duplicates and out-of-invariant values are rejected
// with the offending key and line.

#pragma once

#include "nvdac/dynamics.hpp"
#include "nvdac/pressure.hpp"
#include "nvdac/simulation.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nvdac {

struct Config {
    PressureModel pressure_model{default_paper_model()};
    OpticalModel optical;
    NoiseModel noise;
    FieldVector field{460.0};
    std::uint64_t rng_seed{20240611};

    // Simulation context at `pressure_gpa` (RangeError outside the model range).
    SimulationContext context(double pressure_gpa) const;
};

// Throws ParseError (syntax, unknown or duplicate key, bad number) or
// ValidationError (value breaks an invariant; the message names the key).
Config parse_config(std::string_view text);

// Throws ValidationError "config not found: <path>" when the file cannot be opened.
Config load_config(const std::string& path);

// Every recognised key with its current value, one per line; parse_config(render_config(c)) == c.
std::string render_config(const Config& c);

const std::vector<std::string>& config_keys();

} // namespace nvdac
