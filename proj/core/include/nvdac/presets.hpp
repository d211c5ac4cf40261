// presets.hpp — named measurement sequences. Sweep windows and carrier
// frequencies are computed from the simulator's Hamiltonian, so the same preset
// follows the resonances across pressure and field.
//
//   odmr_cw         CW ODMR over both electron lines
//   rabi_e          electron Rabi nutation on the m_S = 0 <-> -1 line
//   nmr_cw          CW NMR around the m_S = 0 nuclear line
//   nmr_pulsed_ms0  pulsed NMR, m_I = +1 <-> 0 in m_S = 0
//   nmr_pulsed_ms1  pulsed NMR, m_I = +1 <-> 0 in m_S = -1 (MW pi pulses around the RF)
//   rabi_n          nuclear Rabi nutation
//   fid_n           nuclear Ramsey fringes (detuned pi/2 - tau - pi/2)
//   t1_e            electron population recovery after a MW pi pulse

#pragma once

#include "nvdac/sequence.hpp"
#include "nvdac/simulation.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nvdac {

// Recognised override keys: rf_rabi, mw_rabi, center, span, points, start, stop,
// shots, laser, read, detuning. Unknown keys raise ValidationError.
PulseSequence preset(std::string_view name, const Simulator& sim,
                     const std::map<std::string, double>& overrides = {});

const std::vector<std::string>& preset_names();

// Resonances used by the presets (Hz).
struct Resonances {
    double nmr_ms0{0.0};  // |0,+1> <-> |0,0>
    double nmr_ms1{0.0};  // |-1,+1> <-> |-1,0>
    double esr{0.0};      // |0,+1> <-> |-1,+1>
    double esr_upper{0.0};// |0,+1> <-> |+1,+1>
};
Resonances resonances(const Simulator& sim);

} // namespace nvdac
