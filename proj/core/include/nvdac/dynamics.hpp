// dynamics.hpp — open-system evolution of the NV / 14N system: density
// matrices, Lindblad propagation, the 21-level optical cycle (ground triplet,
// excited triplet, metastable singlet, each times the 14N spin), coherent
// drives and fluorescence readout.
//
// 21-level ordering: [0, 9) ground |m_S, m_I>, [9, 18) excited |m_S, m_I>,
// [18, 21) singlet |m_I>. Rates are in 1/s, Hamiltonians in Hz.

#pragma once

#include "nvdac/linalg.hpp"
#include "nvdac/spinops.hpp"

#include <limits>
#include <vector>

namespace nvdac {

inline constexpr Eigen::Index kGroundDim = 9;
inline constexpr Eigen::Index kFullDim = 21;

struct DensityStats {
    double trace_deviation{0.0};
    double hermiticity{0.0};
    double min_eigenvalue{0.0};
};

class DensityMatrix {
public:
    // Validates dimension (9 or 21), trace, Hermiticity and positivity.
    explicit DensityMatrix(CMatrix m);

    static DensityMatrix maximally_mixed_ground();
    static DensityMatrix maximally_mixed_full();       // ground manifold only, 1/9 each
    static DensityMatrix pure_ground(int ms, int mi);
    static DensityMatrix from_populations(const RVector& p);  // diagonal, 9 or 21 entries

    // Internal constructor for propagated states: Hermitizes but does not validate.
    static DensityMatrix unchecked(CMatrix m);

    const CMatrix& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }
    bool is_full() const noexcept { return m_.rows() == kFullDim; }

    RVector populations() const;
    DensityStats stats() const;

    // 9 -> 21 embedding into the ground manifold.
    DensityMatrix embedded_full() const;
    // Ground-manifold block of a 21-level state (not renormalized).
    CMatrix ground_block() const;

private:
    explicit DensityMatrix(CMatrix m, bool);
    CMatrix m_;
};

struct OpticalModel {
    double pump_rate{10.0e6};
    double cw_pump_rate{1.0e5};         // weak continuous illumination used in CW mode
    double radiative_rate{66.0e6};
    double isc_rate_ms0{5.0e6};
    double isc_rate_ms1{50.0e6};
    double singlet_decay{3.3e6};
    double singlet_branching_ms0{0.9};
    double counts_rate_bright{2.0e5};   // counts/s from |0,+1> during readout
    double contrast_nuclear{0.20};
    double contrast_electron{0.30};

    void validate() const;
};

struct NoiseModel {
    double t1e{254.0e-6};
    double t2e_star{30.0e-9};
    double t2n_star{70.0e-6};
    double t1n{std::numeric_limits<double>::infinity()};
    bool shot_noise{true};

    void validate() const;
};

// Relaxation / dephasing channels on the 9-dim ground manifold (product basis).
// Pure dephasing acts on the energy eigenstates of `h`: the operators are the
// diagonal parts of S_z and I_z in its eigenbasis, so dephasing never moves
// population between hyperfine-mixed levels. Without `h` the product basis is used.
std::vector<Collapse> ground_noise_collapse(const NoiseModel& noise);
std::vector<Collapse> ground_noise_collapse(const NoiseModel& noise, const Hamiltonian& h);
std::vector<Collapse> ground_noise_collapse(const NoiseModel& noise, const Eigensystem& eigen);

// One exact step exp(L dt) of the Lindblad equation. Throws StepSizeError when
// 2*pi*||H||*dt exceeds pi, ValidationError on dimension mismatch or dt <= 0.
DensityMatrix lindblad_step(const DensityMatrix& rho, const CMatrix& h_hz,
                            const std::vector<Collapse>& collapse, double dt);

// Arbitrary-duration evolution under a constant generator (substepped internally).
DensityMatrix evolve(const DensityMatrix& rho, const CMatrix& h_hz,
                     const std::vector<Collapse>& collapse, double duration);

// Precomputed generator of the optical cycle restricted to the manifold-diagonal
// blocks (GG 81 + EE 81 + SS 9 entries). Inter-manifold coherences are never
// sourced in this model and are dropped on entry.
class OpticalCycle {
public:
    OpticalCycle(const OpticalModel& model, const NVParams& p, const FieldVector& b,
                 const NoiseModel& noise, bool laser_on = true);

    static constexpr Eigen::Index kBlockDim = 81 + 81 + 9;

    const CMatrix& generator() const noexcept { return gen_; }
    CMatrix propagator(double duration) const;

    static CVector pack(const DensityMatrix& rho);
    static DensityMatrix unpack(const CVector& v);

    DensityMatrix apply(const CMatrix& propagator, const DensityMatrix& rho) const;

private:
    CMatrix gen_;
};

// Laser on for `duration`. Input may be 9- or 21-dimensional; output is 21-dim.
DensityMatrix optical_pump(const DensityMatrix& rho, const OpticalModel& model, const NVParams& p,
                           const FieldVector& b, double duration, const NoiseModel& noise = {});

// Laser-off settling: excited and singlet populations decay into the ground
// manifold through their branching ratios. Returns a 9-dim state.
DensityMatrix relax_to_ground(const DensityMatrix& rho, const OpticalModel& model);

// Nuclear-spin marginal populations (m_I = +1, 0, -1), any manifold.
Eigen::Vector3d nuclear_populations(const DensityMatrix& rho);
// Electron populations (m_S = +1, 0, -1) of the ground manifold.
Eigen::Vector3d electron_populations(const DensityMatrix& rho);
// p(m_I=+1) - p(m_I=-1).
double nuclear_polarization(const DensityMatrix& rho);

struct DnpPoint {
    double field_gauss{0.0};
    double polarization{0.0};
    double population_plus{0.0};
};

// Nuclear polarization after `pump_time` of pumping from the maximally mixed state,
// for an aligned field of each magnitude.
std::vector<DnpPoint> dnp_efficiency_scan(const OpticalModel& model, const NVParams& p,
                                          const std::vector<double>& fields_gauss,
                                          double pump_time = 5.0e-6, const NoiseModel& noise = {});

struct ReadoutResult {
    double mean{0.0};
    double sigma{0.0};
};

// Relative fluorescence rate of each ground basis state (1 for |0,+1>).
RVector readout_weights(const OpticalModel& model);

// Expected photon number over `shots` windows; Poisson sigma when shot noise is on.
ReadoutResult readout(const DensityMatrix& rho, const OpticalModel& model, double window,
                      double shots = 1.0, bool shot_noise = true);

// Free precession under the (lab-frame) ground Hamiltonian with noise channels.
DensityMatrix free_evolution(const DensityMatrix& rho, const Hamiltonian& h,
                             const NoiseModel& noise, double tau);

} // namespace nvdac
