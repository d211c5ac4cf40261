// simulation.hpp — executes pulse sequences on the NV / 14N model.
//
// Pulsed sequences start from the maximally mixed ground state. Each laser
// segment is followed by laser-off settling into the ground manifold; drive
// segments run in their rotating frame and waits under the exact lab-frame
// Liouvillian, so the ground state is always carried in the lab product basis at
// the absolute sequence time. CW sequences are evaluated at their steady state.
//
// Signals are fluorescence normalized to the |0,+1> rate, so a fully polarized
// ground state reads 1.

#pragma once

#include "nvdac/dynamics.hpp"
#include "nvdac/frame.hpp"
#include "nvdac/pressure.hpp"
#include "nvdac/sequence.hpp"
#include "nvdac/spectrum.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace nvdac {

struct SimulationContext {
    NVParams params;
    FieldVector field{460.0};
    OpticalModel optical;
    NoiseModel noise;
    double pressure_gpa{std::numeric_limits<double>::quiet_NaN()};
    // CW microwave sweeps average the four NV orientations of the crystal, each
    // seeing the field in its own axis frame. Pulsed sequences and RF drives
    // address the axis-0 subensemble only.
    bool orientation_average{true};
    std::uint64_t seed{0};

    // Parameters interpolated from `model` at `pressure_gpa` (RangeError outside).
    static SimulationContext at_pressure(const PressureModel& model, double pressure_gpa,
                                         const FieldVector& field);
    void validate() const;
};

struct PointResult {
    double signal{0.0};
    double sigma{0.0};       // shot-noise standard deviation of `signal`
    bool rwa_warning{false};
    double rwa_ratio{0.0};   // largest over the sequence's drives
};

class Simulator {
public:
    explicit Simulator(SimulationContext ctx);

    const SimulationContext& context() const noexcept { return ctx_; }
    const Hamiltonian& ground_hamiltonian() const noexcept { return ground_; }

    // Noise-free expectation of one sequence point.
    PointResult run_point(const PulseSequence& seq, const std::map<std::string, double>& bindings = {}) const;

    // Expected spectrum over the sequence's sweep (sigma from shot noise, y noise-free).
    // threads <= 0 reads NVDAC_THREADS, falling back to the hardware count.
    Spectrum expected_sweep(const PulseSequence& seq, const std::string& mode = "", int threads = 0) const;

    // expected_sweep plus Gaussian-approximated Poisson noise drawn from the
    // context seed when shot noise is enabled. Identical for any thread count.
    Spectrum run_sweep(const PulseSequence& seq, const std::string& mode = "", int threads = 0) const;

    // Ground state reached after the sequence's leading laser pulse, before any drive.
    DensityMatrix polarized_state(double laser_duration) const;

private:
    struct Cache;

    DensityMatrix laser(const DensityMatrix& rho, double duration) const;
    std::shared_ptr<const CMatrix> drive_propagator(const RotatingFrame& frame, double duration,
                                                    bool cacheable) const;
    PointResult run_pulsed(const PulseSequence& seq, const std::map<std::string, double>& b) const;
    double cw_rate(const FieldVector& b_nv, const Drive& drive) const;
    PointResult run_cw(const PulseSequence& seq, const std::map<std::string, double>& b) const;

    SimulationContext ctx_;
    Hamiltonian ground_;
    std::shared_ptr<Cache> cache_;
};

// Adds per-point Gaussian noise of width sigma using a stream derived from
// (seed, point index); the result does not depend on evaluation order.
Spectrum add_shot_noise(const Spectrum& expected, std::uint64_t seed);

// Independent seed for sub-stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Worker count used by sweeps when none is requested.
int default_thread_count();

} // namespace nvdac
