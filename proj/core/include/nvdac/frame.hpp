// frame.hpp — rotating-frame treatment of MW / RF drives on the ground manifold.
//
// The frame is diagonal in the eigenbasis of the static ground Hamiltonian:
// eigenstate k rotates at frame energy phi_k, so the static part becomes
// diag(E_k - phi_k) exactly. Drive matrix elements are kept only between states
// whose frame energies differ by exactly the carrier (rotating-wave approximation);
// noise operators are split into secular components by their rotation frequency.

#pragma once

#include "nvdac/dynamics.hpp"

#include <vector>

namespace nvdac {

enum class DriveKind { mw, rf };

struct Drive {
    DriveKind kind{DriveKind::rf};
    double frequency{0.0};  // Hz
    double rabi{0.0};       // Hz, Rabi frequency of a spin-1 |m>-|m+-1> pair
    double phase{0.0};      // rad
};

class RotatingFrame {
public:
    RotatingFrame(const Hamiltonian& ground, const Drive& drive);

    const Drive& drive() const noexcept { return drive_; }
    const Eigensystem& eigen() const noexcept { return es_; }
    const RVector& frame_energies() const noexcept { return phi_; }

    // Time-independent Hamiltonian in the rotating eigenbasis (Hz).
    const CMatrix& hamiltonian() const noexcept { return h_rot_; }

    // Lab-frame (product basis) operators -> secular components in the rotating eigenbasis.
    std::vector<Collapse> secular(const std::vector<Collapse>& lab_ops) const;

    // (k, l) -> 1 when phi_k == phi_l, i.e. the element does not rotate.
    const RMatrix& static_mask() const noexcept { return static_mask_; }

    // Product-basis lab state at time t <-> rotating-eigenbasis state.
    CMatrix to_frame(const CMatrix& rho_product, double t) const;
    CMatrix from_frame(const CMatrix& rho_rot, double t) const;

    // Drive Rabi frequency over the smallest detuning of any transition the RWA
    // discards (including counter-rotating partners). Warns above 0.2.
    double rwa_ratio() const noexcept { return rwa_ratio_; }
    bool rwa_warning() const noexcept { return rwa_ratio_ > 0.2; }

private:
    Drive drive_;
    Eigensystem es_;
    RVector phi_;
    CMatrix h_rot_;
    RMatrix static_mask_;
    double rwa_ratio_{0.0};
};

struct PulseResult {
    DensityMatrix rho;
    bool rwa_warning{false};
    double rwa_ratio{0.0};
};

// 81x81 propagator of a drive segment in the rotating eigenbasis.
CMatrix pulse_propagator(const RotatingFrame& frame, const NoiseModel& noise, double duration);

// Drive applied to a 9-dim ground state from lab time t_start for `duration`.
PulseResult coherent_pulse(const DensityMatrix& rho, const RotatingFrame& frame, double duration,
                           const NoiseModel& noise, double t_start = 0.0);
PulseResult apply_pulse_propagator(const DensityMatrix& rho, const RotatingFrame& frame,
                                   const CMatrix& propagator, double t_start, double duration);

// Noise-free lab-frame integration of the full cos(2 pi f t + phase) drive,
// used to bound the rotating-wave error. steps_per_period sets the time step.
DensityMatrix coherent_pulse_lab(const DensityMatrix& rho, const Hamiltonian& ground,
                                 const Drive& drive, double duration, double t_start = 0.0,
                                 int steps_per_period = 64);

// Steady state of continuous laser pumping (at model.cw_pump_rate) plus a
// continuous drive (CW mode).
// Returned as a 21-dim state in the lab product basis at t = 0.
DensityMatrix cw_steady_state(const OpticalModel& model, const NVParams& p, const FieldVector& b,
                              const NoiseModel& noise, const Drive& drive);

} // namespace nvdac
