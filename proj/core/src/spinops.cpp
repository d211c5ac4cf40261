#include "nvdac/spinops.hpp"

#include "nvdac/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nvdac {

OperatorSet spin1_operators() {
    const double r = 1.0 / std::sqrt(2.0);
    const cplx i(0.0, 1.0);
    OperatorSet s;
    s.sx = CMatrix::Zero(3, 3);
    s.sy = CMatrix::Zero(3, 3);
    s.sz = CMatrix::Zero(3, 3);
    s.sx(0, 1) = s.sx(1, 0) = s.sx(1, 2) = s.sx(2, 1) = r;
    s.sy(0, 1) = -i * r;
    s.sy(1, 0) = i * r;
    s.sy(1, 2) = -i * r;
    s.sy(2, 1) = i * r;
    s.sz(0, 0) = 1.0;
    s.sz(2, 2) = -1.0;
    s.identity = CMatrix::Identity(3, 3);
    return s;
}

void NVParams::validate(bool check_physical_ranges) const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ValidationError(std::string("NVParams: ") + what);
    };
    require(std::isfinite(d_gs) && d_gs > 0.0, "d_gs must be > 0");
    require(std::isfinite(d_es) && d_es > 0.0, "d_es must be > 0");
    require(std::isfinite(gamma_e) && gamma_e > 0.0, "gamma_e must be > 0");
    require(std::isfinite(gamma_n) && gamma_n > 0.0, "gamma_n must be > 0");
    require(std::isfinite(q) && std::isfinite(a_par) && std::isfinite(a_perp) &&
                std::isfinite(a_par_es) && std::isfinite(a_perp_es),
            "coupling constants must be finite");
    if (check_physical_ranges) {
        require(std::abs(q) >= 4.0e6 && std::abs(q) <= 5.5e6, "|q| outside [4.0, 5.5] MHz");
        require(std::abs(a_par) >= 1.5e6 && std::abs(a_par) <= 2.5e6,
                "|a_par| outside [1.5, 2.5] MHz");
    }
}

FieldVector::FieldVector(double magnitude_gauss, double theta_rad, double phi_rad)
    : magnitude_(magnitude_gauss), theta_(theta_rad), phi_(phi_rad) {
    if (!(std::isfinite(magnitude_) && magnitude_ >= 0.0))
        throw ValidationError("FieldVector: magnitude must be >= 0");
    if (!(theta_ >= 0.0 && theta_ <= kPi))
        throw ValidationError("FieldVector: theta must lie in [0, pi]");
    if (!(phi_ >= 0.0 && phi_ < kTwoPi))
        throw ValidationError("FieldVector: phi must lie in [0, 2pi)");
}

FieldVector FieldVector::from_cartesian(const Eigen::Vector3d& b) {
    const double mag = b.norm();
    if (mag == 0.0) return FieldVector{};
    const double theta = std::acos(std::clamp(b.z() / mag, -1.0, 1.0));
    double phi = std::atan2(b.y(), b.x());
    if (phi < 0.0) phi += kTwoPi;
    if (phi >= kTwoPi) phi = 0.0;
    return FieldVector(mag, theta, phi);
}

Eigen::Vector3d FieldVector::cartesian() const {
    return magnitude_ * Eigen::Vector3d(std::sin(theta_) * std::cos(phi_),
                                        std::sin(theta_) * std::sin(phi_), std::cos(theta_));
}

std::string to_string(const SpinLabel& label) {
    const char* tag = label.manifold == Manifold::ground    ? "gs"
                      : label.manifold == Manifold::excited ? "es"
                                                            : "singlet";
    return std::string(tag) + "|" + std::to_string(label.ms) + "," + std::to_string(label.mi) + ">";
}

Hamiltonian::Hamiltonian(CMatrix matrix, std::vector<SpinLabel> labels)
    : matrix_(std::move(matrix)), labels_(std::move(labels)) {
    if (matrix_.rows() != matrix_.cols())
        throw ValidationError("Hamiltonian: matrix must be square");
    if (static_cast<std::size_t>(matrix_.rows()) != labels_.size())
        throw ValidationError("Hamiltonian: basis label count does not match dimension");
    if (hermiticity_defect(matrix_) > 1e-9)
        throw ValidationError("Hamiltonian: matrix is not Hermitian");
}

namespace {

std::vector<SpinLabel> product_labels(Manifold m) {
    std::vector<SpinLabel> labels;
    for (int ms = 1; ms >= -1; --ms)
        for (int mi = 1; mi >= -1; --mi) labels.push_back({ms, mi, m});
    return labels;
}

CMatrix spin_hamiltonian(double d, double a_par, double a_perp, const NVParams& p,
                         const FieldVector& b) {
    const OperatorSet s = spin1_operators();
    const CMatrix& id = s.identity;
    const Eigen::Vector3d bv = b.cartesian();

    const CMatrix sx = kron(s.sx, id), sy = kron(s.sy, id), sz = kron(s.sz, id);
    const CMatrix ix = kron(id, s.sx), iy = kron(id, s.sy), iz = kron(id, s.sz);

    CMatrix h = d * sz * sz;
    h += p.gamma_e * (bv.x() * sx + bv.y() * sy + bv.z() * sz);
    h += p.q * iz * iz;
    h += a_par * sz * iz + a_perp * (sx * ix + sy * iy);
    // 14N has a positive gyromagnetic ratio: its Zeeman energy is -gamma_n B.I
    h -= p.gamma_n * (bv.x() * ix + bv.y() * iy + bv.z() * iz);
    return 0.5 * (h + h.adjoint());
}

} // namespace

Hamiltonian build_ground_hamiltonian(const NVParams& p, const FieldVector& b) {
    return Hamiltonian(spin_hamiltonian(p.d_gs, p.a_par, p.a_perp, p, b),
                       product_labels(Manifold::ground));
}

Hamiltonian build_excited_hamiltonian(const NVParams& p, const FieldVector& b) {
    return Hamiltonian(spin_hamiltonian(p.d_es, p.a_par_es, p.a_perp_es, p, b),
                       product_labels(Manifold::excited));
}

Eigensystem eigensystem(const CMatrix& h) {
    if (h.rows() != h.cols()) throw ValidationError("eigensystem: matrix must be square");
    if (hermiticity_defect(h) > 1e-9) throw ValidationError("eigensystem: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
    if (solver.info() != Eigen::Success) throw ValidationError("eigensystem: decomposition failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigensystem eigensystem(const Hamiltonian& h) { return eigensystem(h.matrix()); }

Eigen::Index eigenstate_for(const Hamiltonian& h, const Eigensystem& es, const SpinLabel& label) {
    const auto& labels = h.labels();
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end())
        throw ValidationError("unknown basis label " + to_string(label));
    const auto row = static_cast<Eigen::Index>(it - labels.begin());
    Eigen::Index best = 0;
    const double weight = es.states.row(row).cwiseAbs2().maxCoeff(&best);
    if (!(weight > 0.5))
        throw MixingError("no eigenstate has > 0.5 weight on " + to_string(label) +
                          " (max " + std::to_string(weight) + "); near a level anti-crossing");
    return best;
}

double transition_frequency(const Hamiltonian& h, const Eigensystem& es, const SpinLabel& from,
                            const SpinLabel& to) {
    const Eigen::Index a = eigenstate_for(h, es, from);
    const Eigen::Index b = eigenstate_for(h, es, to);
    return std::abs(es.energies(b) - es.energies(a));
}

double transition_frequency(const Hamiltonian& h, const SpinLabel& from, const SpinLabel& to) {
    return transition_frequency(h, eigensystem(h), from, to);
}

const std::array<Eigen::Vector3d, 4>& nv_axes() {
    static const std::array<Eigen::Vector3d, 4> axes = [] {
        const double ct = -1.0 / 3.0;
        const double st = std::sqrt(1.0 - ct * ct);
        std::array<Eigen::Vector3d, 4> a;
        a[0] = Eigen::Vector3d(0.0, 0.0, 1.0);
        for (int k = 0; k < 3; ++k) {
            const double ph = kTwoPi * k / 3.0;
            a[k + 1] = Eigen::Vector3d(st * std::cos(ph), st * std::sin(ph), ct);
        }
        return a;
    }();
    return axes;
}

FieldVector field_in_axis_frame(const FieldVector& b_lab, int axis) {
    const Eigen::Vector3d n = nv_axes().at(static_cast<std::size_t>(axis));
    Eigen::Vector3d ref = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d e1 = (ref - ref.dot(n) * n).normalized();
    const Eigen::Vector3d e2 = n.cross(e1);
    const Eigen::Vector3d b = b_lab.cartesian();
    return FieldVector::from_cartesian(Eigen::Vector3d(b.dot(e1), b.dot(e2), b.dot(n)));
}

std::array<double, 2> electron_lines(const NVParams& p, const FieldVector& b_nv) {
    const Hamiltonian h = build_ground_hamiltonian(p, b_nv);
    const Eigensystem es = eigensystem(h);
    // Electron manifolds are GHz apart while nuclear structure is MHz: consecutive
    // triples of the sorted spectrum are the three electron manifolds.
    std::array<double, 3> mean{};
    std::array<double, 3> ms0_weight{};
    for (int c = 0; c < 3; ++c) {
        for (int k = 0; k < 3; ++k) {
            const Eigen::Index col = 3 * c + k;
            mean[c] += es.energies(col) / 3.0;
            for (int mi = 1; mi >= -1; --mi)
                ms0_weight[c] += std::norm(es.states(product_index(0, mi), col));
        }
    }
    const auto zero = static_cast<int>(
        std::max_element(ms0_weight.begin(), ms0_weight.end()) - ms0_weight.begin());
    std::array<double, 2> lines{};
    int n = 0;
    for (int c = 0; c < 3; ++c) {
        if (c == zero) continue;
        lines[n++] = std::abs(mean[c] - mean[zero]);
    }
    if (lines[0] > lines[1]) std::swap(lines[0], lines[1]);
    return lines;
}

std::vector<double> odmr_lines(const NVParams& p, const FieldVector& b_lab) {
    std::vector<double> out;
    out.reserve(8);
    for (int axis = 0; axis < 4; ++axis) {
        const auto l = electron_lines(p, field_in_axis_frame(b_lab, axis));
        out.push_back(l[0]);
        out.push_back(l[1]);
    }
    return out;
}

} // namespace nvdac
