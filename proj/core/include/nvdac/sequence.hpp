// sequence.hpp — pulse sequences and their text form.
//
//   laser 3e-6
//   rf $f 25e3 pi
//   laser_read 3e-7
//   sweep f 4.9e6 5.2e6 151
//
// or, for continuous-wave experiments,
//
//   cw { laser; rf $f 10e3; read 1e-3 }
//   sweep f 4.9e6 5.2e6 151
//
// '#' starts a comment. Numeric fields accept "$name" for the swept variable.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nvdac {

enum class PulseKind { laser, read, wait, mw, rf };

std::string_view to_string(PulseKind kind);

// A number or a reference to the sweep variable.
struct Value {
    double number{0.0};
    std::string symbol;  // empty for a literal

    static Value literal(double v) { return {v, {}}; }
    static Value ref(std::string name) { return {0.0, std::move(name)}; }

    bool is_symbol() const noexcept { return !symbol.empty(); }
    double resolve(const std::map<std::string, double>& bindings) const;
    bool operator==(const Value&) const = default;
};

enum class AreaSymbol { none, pi, half_pi };

struct Pulse {
    PulseKind kind{PulseKind::laser};
    Value duration;                 // s; ignored when area != none
    AreaSymbol area{AreaSymbol::none};
    bool has_duration{true};        // false only inside cw blocks
    Value frequency;                // Hz, drives only
    double rabi{0.0};               // Hz, drives only
    double phase{0.0};              // rad, drives only

    bool is_drive() const noexcept { return kind == PulseKind::mw || kind == PulseKind::rf; }
    // Duration in seconds after binding symbols; pi areas use 1/(2 rabi).
    double resolved_duration(const std::map<std::string, double>& bindings) const;
    bool operator==(const Pulse&) const = default;
};

struct Sweep {
    std::string variable;
    double start{0.0};
    double stop{0.0};
    int points{0};

    std::vector<double> grid() const;
    bool operator==(const Sweep&) const = default;
};

struct PulseSequence {
    std::vector<Pulse> pulses;
    bool cw{false};
    std::optional<Sweep> sweep;
    double shots_per_point{3.0e5};

    // Structural checks: one sweep at most, every symbol bound by it, a read
    // pulse present, positive literal durations and rabi frequencies.
    void validate() const;
    bool operator==(const PulseSequence&) const = default;
};

// Throws ParseError with 1-based line and column.
PulseSequence parse_sequence(std::string_view text);

// Canonical text form; parse_sequence(render(s)) == s.
std::string render(const PulseSequence& seq);

// Copy of `seq` with the phase of its last drive advanced by pi. Differencing a
// Ramsey trace against its phase-alternated twin removes every signal component
// that does not depend on the final pulse phase (population recovery, baseline).
PulseSequence phase_alternated(const PulseSequence& seq);

} // namespace nvdac
