// spinops.hpp — spin-1 operator algebra and the NV-electron / 14N Hamiltonians
//
// Product basis ordering is |m_S> (x) |m_I> with both spins listed as (+1, 0, -1),
// so index = 3 * (1 - m_S) + (1 - m_I). All energies are in Hz, fields in Gauss.

#pragma once

#include "nvdac/linalg.hpp"

#include <array>
#include <string>
#include <vector>

namespace nvdac {

struct OperatorSet {
    CMatrix sx;
    CMatrix sy;
    CMatrix sz;
    CMatrix identity;
};

OperatorSet spin1_operators();

// Spin-Hamiltonian coefficients at one pressure. q and the hyperfine terms are
// signed; reported quantities elsewhere are magnitudes.
struct NVParams {
    double d_gs{2.870e9};
    double d_es{1.420e9};
    double q{-4.945e6};
    double a_par{2.16e6};
    double a_perp{2.7e6};
    double a_par_es{40.0e6};
    double a_perp_es{40.0e6};
    double gamma_e{2.8025e6};   // Hz/G
    double gamma_n{307.7};      // Hz/G

    // Throws ValidationError naming the offending field. The |q| / |a_par|
    // window is the physical-plausibility guard for 14N and can be skipped.
    void validate(bool check_physical_ranges = true) const;
};

// Field in spherical form; theta is measured from the NV (or lab z) axis.
class FieldVector {
public:
    FieldVector() = default;
    FieldVector(double magnitude_gauss, double theta_rad = 0.0, double phi_rad = 0.0);

    static FieldVector from_cartesian(const Eigen::Vector3d& b);

    double magnitude() const noexcept { return magnitude_; }
    double theta() const noexcept { return theta_; }
    double phi() const noexcept { return phi_; }
    Eigen::Vector3d cartesian() const;

private:
    double magnitude_{0.0};
    double theta_{0.0};
    double phi_{0.0};
};

enum class Manifold { ground, excited, singlet };

struct SpinLabel {
    int ms{0};
    int mi{0};
    Manifold manifold{Manifold::ground};

    friend bool operator==(const SpinLabel&, const SpinLabel&) = default;
};

std::string to_string(const SpinLabel& label);

// Index of |m_S, m_I> in the 9-dimensional product basis.
constexpr int product_index(int ms, int mi) noexcept { return 3 * (1 - ms) + (1 - mi); }

class Hamiltonian {
public:
    Hamiltonian(CMatrix matrix, std::vector<SpinLabel> labels);

    const CMatrix& matrix() const noexcept { return matrix_; }
    const std::vector<SpinLabel>& labels() const noexcept { return labels_; }
    Eigen::Index dim() const noexcept { return matrix_.rows(); }

private:
    CMatrix matrix_;
    std::vector<SpinLabel> labels_;
};

Hamiltonian build_ground_hamiltonian(const NVParams& p, const FieldVector& b);
Hamiltonian build_excited_hamiltonian(const NVParams& p, const FieldVector& b);

struct Eigensystem {
    RVector energies;   // ascending, Hz
    CMatrix states;     // eigenvectors as columns
};

// Throws ValidationError when h is not Hermitian to 1e-9 relative.
Eigensystem eigensystem(const Hamiltonian& h);
Eigensystem eigensystem(const CMatrix& h);

// Column of `es` whose weight on basis state `label` exceeds 0.5.
// Throws MixingError if none does.
Eigen::Index eigenstate_for(const Hamiltonian& h, const Eigensystem& es, const SpinLabel& label);

// |E_to - E_from| in Hz, eigenstates identified by maximum overlap.
double transition_frequency(const Hamiltonian& h, const SpinLabel& from, const SpinLabel& to);
double transition_frequency(const Hamiltonian& h, const Eigensystem& es,
                            const SpinLabel& from, const SpinLabel& to);

// Unit vectors of the four NV orientations in the lab frame. Axis 0 is the
// lab z axis; the other three sit at arccos(-1/3) with azimuths 0, 120, 240 deg.
const std::array<Eigen::Vector3d, 4>& nv_axes();

// Field expressed in the frame of one NV axis.
FieldVector field_in_axis_frame(const FieldVector& b_lab, int axis);

// Electron resonance centers (hyperfine-averaged) for each orientation:
// entries 2k and 2k+1 are the lower and upper line of axis k.
std::vector<double> odmr_lines(const NVParams& p, const FieldVector& b_lab);

// Lower / upper electron line of a single orientation, in that NV's frame.
std::array<double, 2> electron_lines(const NVParams& p, const FieldVector& b_nv);

} // namespace nvdac
