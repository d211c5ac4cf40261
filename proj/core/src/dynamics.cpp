#include "nvdac/dynamics.hpp"

#include "nvdac/errors.hpp"
#include "optical_generator.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace nvdac {

namespace {

constexpr Eigen::Index kGG = 0;
constexpr Eigen::Index kEE = 81;
constexpr Eigen::Index kSS = 162;

double min_eigenvalue(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

CMatrix sup(const CMatrix& left, const CMatrix& right) {
    // X -> left * X * right
    return kron(right.transpose(), left);
}

CMatrix commutator_sup(const CMatrix& h) {
    const Eigen::Index n = h.rows();
    const CMatrix id = CMatrix::Identity(n, n);
    return cplx(0.0, -kTwoPi) * (kron(id, h) - kron(h.transpose(), id));
}

CMatrix anticommutator_loss(const CMatrix& gamma) {
    const Eigen::Index n = gamma.rows();
    const CMatrix id = CMatrix::Identity(n, n);
    return -0.5 * (kron(id, gamma) + kron(gamma.transpose(), id));
}

CVector mask_sup(const RMatrix& mask) {
    return Eigen::Map<const RVector>(mask.data(), mask.size()).cast<cplx>();
}

// |target block, ms, mI><mI| style maps between the 9-dim spin space and the
// 3-dim singlet nuclear space.
CMatrix singlet_from_ms(int ms) {
    CMatrix k = CMatrix::Zero(3, 9);
    for (int mi = 1; mi >= -1; --mi) k(1 - mi, product_index(ms, mi)) = 1.0;
    return k;
}

CMatrix nuclear_hamiltonian(const NVParams& p, const FieldVector& b) {
    const OperatorSet s = spin1_operators();
    const Eigen::Vector3d bv = b.cartesian();
    CMatrix h = p.q * s.sz * s.sz - p.gamma_n * (bv.x() * s.sx + bv.y() * s.sy + bv.z() * s.sz);
    return 0.5 * (h + h.adjoint());
}

double spectral_norm(const CMatrix& h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double branching(const OpticalModel& m, int ms) {
    return ms == 0 ? m.singlet_branching_ms0 : 0.5 * (1.0 - m.singlet_branching_ms0);
}

double isc_rate(const OpticalModel& m, int ms) { return ms == 0 ? m.isc_rate_ms0 : m.isc_rate_ms1; }

} // namespace

// ---------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(CMatrix m, bool) : m_(std::move(m)) {}

DensityMatrix::DensityMatrix(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || (m_.rows() != kGroundDim && m_.rows() != kFullDim))
        throw ValidationError("DensityMatrix: dimension must be 9 or 21");
    const DensityStats s = stats();
    if (s.trace_deviation > 1e-8)
        throw ValidationError("DensityMatrix: trace deviates from 1 by " + std::to_string(s.trace_deviation));
    if (s.hermiticity > 1e-9) throw ValidationError("DensityMatrix: not Hermitian");
    if (s.min_eigenvalue < -1e-8) throw ValidationError("DensityMatrix: not positive semidefinite");
}

DensityMatrix DensityMatrix::unchecked(CMatrix m) {
    CMatrix h = 0.5 * (m + m.adjoint());
    return DensityMatrix(std::move(h), true);
}

DensityMatrix DensityMatrix::maximally_mixed_ground() {
    return DensityMatrix(CMatrix::Identity(9, 9) / 9.0);
}

DensityMatrix DensityMatrix::maximally_mixed_full() {
    return maximally_mixed_ground().embedded_full();
}

DensityMatrix DensityMatrix::pure_ground(int ms, int mi) {
    if (std::abs(ms) > 1 || std::abs(mi) > 1) throw ValidationError("pure_ground: quantum numbers must be -1, 0 or +1");
    CMatrix m = CMatrix::Zero(9, 9);
    m(product_index(ms, mi), product_index(ms, mi)) = 1.0;
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::from_populations(const RVector& p) {
    return DensityMatrix(CMatrix(p.cast<cplx>().asDiagonal()));
}

RVector DensityMatrix::populations() const { return m_.diagonal().real(); }

DensityStats DensityMatrix::stats() const {
    DensityStats s;
    s.trace_deviation = std::abs(m_.trace() - cplx(1.0, 0.0));
    s.hermiticity = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    s.min_eigenvalue = min_eigenvalue(m_);
    return s;
}

DensityMatrix DensityMatrix::embedded_full() const {
    if (is_full()) return *this;
    CMatrix m = CMatrix::Zero(kFullDim, kFullDim);
    m.topLeftCorner(9, 9) = m_;
    return DensityMatrix(std::move(m), true);
}

CMatrix DensityMatrix::ground_block() const { return m_.topLeftCorner(9, 9); }

// ---------------------------------------------------------------- models

void OpticalModel::validate() const {
    auto nonneg = [](double v, const char* key) {
        if (!(std::isfinite(v) && v >= 0.0)) throw ValidationError(std::string("optical.") + key + " must be >= 0");
    };
    nonneg(pump_rate, "pump_rate");
    nonneg(cw_pump_rate, "cw_pump_rate");
    nonneg(radiative_rate, "radiative_rate");
    nonneg(isc_rate_ms0, "isc_rate_ms0");
    nonneg(isc_rate_ms1, "isc_rate_ms1");
    nonneg(singlet_decay, "singlet_decay");
    nonneg(counts_rate_bright, "counts_rate_bright");
    if (!(singlet_branching_ms0 >= 0.0 && singlet_branching_ms0 <= 1.0))
        throw ValidationError("optical.singlet_branching_ms0 must lie in [0, 1]");
    if (!(contrast_nuclear >= 0.0 && contrast_nuclear <= 1.0))
        throw ValidationError("optical.contrast_nuclear must lie in [0, 1]");
    if (!(contrast_electron >= 0.0 && contrast_electron <= 1.0))
        throw ValidationError("optical.contrast_electron must lie in [0, 1]");
    if (!(isc_rate_ms1 > isc_rate_ms0))
        throw ValidationError("optical.isc_rate_ms1 must exceed optical.isc_rate_ms0");
}

void NoiseModel::validate() const {
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0)) throw ValidationError(std::string("noise.") + key + " must be > 0");
    };
    positive(t1e, "t1e");
    positive(t2e_star, "t2e_star");
    positive(t2n_star, "t2n_star");
    positive(t1n, "t1n");
    if (!(t2e_star <= 2.0 * t1e)) throw ValidationError("noise.t2e_star must not exceed 2 * noise.t1e");
}

namespace {

std::vector<Collapse> noise_channels(const NoiseModel& noise, const CMatrix* basis) {
    noise.validate();
    const OperatorSet s = spin1_operators();
    const CMatrix& id = s.identity;
    std::vector<Collapse> ops;

    auto relaxation = [&](double t1, bool electron) {
        if (!std::isfinite(t1)) return;
        const double rate = 1.0 / (3.0 * t1);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (i == j) continue;
                CMatrix jump = CMatrix::Zero(3, 3);
                jump(i, j) = 1.0;
                ops.push_back({electron ? kron(jump, id) : kron(id, jump), rate});
            }
    };
    auto diagonal_in_basis = [&](const CMatrix& op) -> CMatrix {
        if (!basis) return op;
        const CVector d = (basis->adjoint() * op * *basis).diagonal();
        return *basis * d.asDiagonal() * basis->adjoint();
    };
    // Population relaxation (rate 1/(3 T1) per pair) already dephases a
    // |Delta m| = 1 coherence at 2/(3 T1); pure dephasing supplies the rest.
    // A nuclear coherence is also lost whenever the electron leaves its m_S
    // level, so t2n_star is the total decay time within one electron manifold.
    auto t1_part = [](double t1) { return std::isfinite(t1) ? 2.0 / (3.0 * t1) : 0.0; };
    auto dephasing = [&](double t2, double t1_rate, const CMatrix& op) {
        const double kappa = 2.0 * std::max(0.0, 1.0 / t2 - t1_rate);
        if (kappa > 0.0) ops.push_back({diagonal_in_basis(op), kappa});
    };
    relaxation(noise.t1e, true);
    dephasing(noise.t2e_star, t1_part(noise.t1e), kron(s.sz, id));
    relaxation(noise.t1n, false);
    dephasing(noise.t2n_star, t1_part(noise.t1n) + t1_part(noise.t1e), kron(id, s.sz));
    return ops;
}

} // namespace

std::vector<Collapse> ground_noise_collapse(const NoiseModel& noise) { return noise_channels(noise, nullptr); }

std::vector<Collapse> ground_noise_collapse(const NoiseModel& noise, const Hamiltonian& h) {
    if (h.dim() != kGroundDim) throw ValidationError("ground_noise_collapse: expects the ground Hamiltonian");
    return ground_noise_collapse(noise, eigensystem(h));
}

std::vector<Collapse> ground_noise_collapse(const NoiseModel& noise, const Eigensystem& eigen) {
    if (eigen.states.rows() != kGroundDim) throw ValidationError("ground_noise_collapse: expects a 9-dim eigenbasis");
    return noise_channels(noise, &eigen.states);
}

// ---------------------------------------------------------------- propagation

DensityMatrix lindblad_step(const DensityMatrix& rho, const CMatrix& h_hz,
                            const std::vector<Collapse>& collapse, double dt) {
    if (!(dt > 0.0)) throw ValidationError("lindblad_step: dt must be > 0");
    if (h_hz.rows() != rho.dim() || h_hz.cols() != rho.dim())
        throw ValidationError("lindblad_step: Hamiltonian and state dimensions differ");
    for (const auto& c : collapse)
        if (c.op.rows() != rho.dim() || c.op.cols() != rho.dim())
            throw ValidationError("lindblad_step: collapse operator dimension mismatch");
    if (kTwoPi * spectral_norm(h_hz) * dt > kPi)
        throw StepSizeError("lindblad_step: 2*pi*||H||*dt exceeds pi; reduce dt");
    CMatrix prop = propagator(liouvillian(h_hz, collapse), dt);
    restore_trace_preservation(prop, rho.dim());
    const CVector out = prop * vectorize(rho.matrix());
    return DensityMatrix::unchecked(unvectorize(out, rho.dim()));
}

DensityMatrix evolve(const DensityMatrix& rho, const CMatrix& h_hz,
                     const std::vector<Collapse>& collapse, double duration) {
    if (duration < 0.0) throw ValidationError("evolve: duration must be >= 0");
    if (h_hz.rows() != rho.dim()) throw ValidationError("evolve: Hamiltonian and state dimensions differ");
    if (duration == 0.0) return rho;
    CMatrix prop = propagator(liouvillian(h_hz, collapse), duration);
    restore_trace_preservation(prop, rho.dim());
    const CVector out = prop * vectorize(rho.matrix());
    return DensityMatrix::unchecked(unvectorize(out, rho.dim()));
}

DensityMatrix free_evolution(const DensityMatrix& rho, const Hamiltonian& h, const NoiseModel& noise,
                             double tau) {
    if (tau < 0.0) throw ValidationError("free_evolution: tau must be >= 0");
    if (rho.dim() != kGroundDim || h.dim() != kGroundDim)
        throw ValidationError("free_evolution: expects a 9-dim ground state and Hamiltonian");
    return evolve(rho, h.matrix(), ground_noise_collapse(noise, h), tau);
}

// ---------------------------------------------------------------- optical cycle

namespace detail {

GroundBlock lab_ground_block(const NVParams& p, const FieldVector& b, const NoiseModel& noise) {
    GroundBlock g;
    const Hamiltonian h = build_ground_hamiltonian(p, b);
    g.hamiltonian = h.matrix();
    g.noise = ground_noise_collapse(noise, h);
    g.to_product = CMatrix::Identity(9, 9);
    g.static_mask = RMatrix::Ones(9, 9);
    return g;
}

CMatrix optical_generator(const OpticalModel& model, const NVParams& p, const FieldVector& b,
                          const GroundBlock& ground, bool laser_on) {
    constexpr Eigen::Index n = OpticalCycle::kBlockDim;
    CMatrix gen = CMatrix::Zero(n, n);
    const CMatrix& v = ground.to_product;
    const CVector mask = mask_sup(ground.static_mask);
    const CMatrix down = mask.asDiagonal() * sup(v.adjoint(), v);  // eigenbasis <- product basis

    // ground <-> ground
    gen.block(kGG, kGG, 81, 81) = commutator_sup(ground.hamiltonian) + dissipator(ground.noise, 9);
    if (laser_on) {
        gen.block(kGG, kGG, 81, 81) -= model.pump_rate * CMatrix::Identity(81, 81);
        // spin-conserving excitation
        gen.block(kEE, kGG, 81, 81) = model.pump_rate * sup(v, v.adjoint()) * mask.asDiagonal();
    }

    // excited: coherent hyperfine mixing plus radiative and ISC loss
    const CMatrix h_es = build_excited_hamiltonian(p, b).matrix();
    CMatrix gamma = CMatrix::Zero(9, 9);
    for (int ms = 1; ms >= -1; --ms)
        for (int mi = 1; mi >= -1; --mi)
            gamma(product_index(ms, mi), product_index(ms, mi)) = model.radiative_rate + isc_rate(model, ms);
    gen.block(kEE, kEE, 81, 81) += commutator_sup(h_es) + anticommutator_loss(gamma);

    // radiative decay back to the ground manifold
    gen.block(kGG, kEE, 81, 81) += model.radiative_rate * down;

    // intersystem crossing into the singlet, nuclear state carried along
    for (int ms = 1; ms >= -1; --ms) {
        const CMatrix k = singlet_from_ms(ms);
        gen.block(kSS, kEE, 9, 81) += isc_rate(model, ms) * sup(k, k.adjoint());
    }

    // singlet
    gen.block(kSS, kSS, 9, 9) = commutator_sup(nuclear_hamiltonian(p, b)) -
                                model.singlet_decay * CMatrix::Identity(9, 9);
    for (int ms = 1; ms >= -1; --ms) {
        const CMatrix k = singlet_from_ms(ms).adjoint();  // 9x3
        gen.block(kGG, kSS, 81, 9) +=
            model.singlet_decay * branching(model, ms) * down * sup(k, k.adjoint());
    }
    return gen;
}

} // namespace detail

OpticalCycle::OpticalCycle(const OpticalModel& model, const NVParams& p, const FieldVector& b,
                           const NoiseModel& noise, bool laser_on) {
    model.validate();
    noise.validate();
    gen_ = detail::optical_generator(model, p, b, detail::lab_ground_block(p, b, noise), laser_on);
}

CMatrix OpticalCycle::propagator(double duration) const {
    if (duration < 0.0) throw ValidationError("optical pump duration must be >= 0");
    return nvdac::propagator(gen_, duration);
}

CVector OpticalCycle::pack(const DensityMatrix& rho) {
    CVector v = CVector::Zero(kBlockDim);
    const CMatrix& m = rho.matrix();
    v.segment(kGG, 81) = vectorize(m.topLeftCorner(9, 9));
    if (rho.is_full()) {
        v.segment(kEE, 81) = vectorize(m.block(9, 9, 9, 9));
        v.segment(kSS, 9) = vectorize(m.block(18, 18, 3, 3));
    }
    return v;
}

DensityMatrix OpticalCycle::unpack(const CVector& v) {
    CMatrix m = CMatrix::Zero(kFullDim, kFullDim);
    m.topLeftCorner(9, 9) = unvectorize(v.segment(kGG, 81), 9);
    m.block(9, 9, 9, 9) = unvectorize(v.segment(kEE, 81), 9);
    m.block(18, 18, 3, 3) = unvectorize(v.segment(kSS, 9), 3);
    return DensityMatrix::unchecked(std::move(m));
}

DensityMatrix OpticalCycle::apply(const CMatrix& prop, const DensityMatrix& rho) const {
    return unpack(prop * pack(rho));
}

DensityMatrix optical_pump(const DensityMatrix& rho, const OpticalModel& model, const NVParams& p,
                           const FieldVector& b, double duration, const NoiseModel& noise) {
    if (duration < 0.0) throw ValidationError("optical_pump: duration must be >= 0");
    if (duration == 0.0) return rho.embedded_full();
    const OpticalCycle cycle(model, p, b, noise);
    return cycle.apply(cycle.propagator(duration), rho);
}

DensityMatrix relax_to_ground(const DensityMatrix& rho, const OpticalModel& model) {
    if (!rho.is_full()) return rho;
    const CMatrix& m = rho.matrix();
    CMatrix out = m.topLeftCorner(9, 9);
    const CMatrix es = m.block(9, 9, 9, 9);
    const CMatrix ss = m.block(18, 18, 3, 3);

    CMatrix k_rad = CMatrix::Zero(9, 9);
    for (int ms = 1; ms >= -1; --ms) {
        const double r = model.radiative_rate / (model.radiative_rate + isc_rate(model, ms));
        for (int mi = 1; mi >= -1; --mi) k_rad(product_index(ms, mi), product_index(ms, mi)) = std::sqrt(r);
    }
    out += k_rad * es * k_rad.adjoint();
    for (int ms = 1; ms >= -1; --ms) {
        const double r = model.radiative_rate / (model.radiative_rate + isc_rate(model, ms));
        const CMatrix to_singlet = singlet_from_ms(ms);
        const CMatrix s_part = to_singlet * es * to_singlet.adjoint();
        for (int target = 1; target >= -1; --target) {
            const CMatrix back = singlet_from_ms(target).adjoint();
            out += (1.0 - r) * branching(model, target) * back * s_part * back.adjoint();
        }
    }
    for (int target = 1; target >= -1; --target) {
        const CMatrix back = singlet_from_ms(target).adjoint();
        out += branching(model, target) * back * ss * back.adjoint();
    }
    return DensityMatrix::unchecked(std::move(out));
}

Eigen::Vector3d nuclear_populations(const DensityMatrix& rho) {
    const RVector p = rho.populations();
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    for (int ms = 1; ms >= -1; --ms)
        for (int mi = 1; mi >= -1; --mi) {
            out(1 - mi) += p(product_index(ms, mi));
            if (rho.is_full()) out(1 - mi) += p(9 + product_index(ms, mi));
        }
    if (rho.is_full()) out += p.tail(3);
    return out;
}

Eigen::Vector3d electron_populations(const DensityMatrix& rho) {
    const RVector p = rho.populations();
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    for (int ms = 1; ms >= -1; --ms)
        for (int mi = 1; mi >= -1; --mi) out(1 - ms) += p(product_index(ms, mi));
    return out;
}

double nuclear_polarization(const DensityMatrix& rho) {
    const Eigen::Vector3d n = nuclear_populations(rho);
    return n(0) - n(2);
}

std::vector<DnpPoint> dnp_efficiency_scan(const OpticalModel& model, const NVParams& p,
                                          const std::vector<double>& fields_gauss, double pump_time,
                                          const NoiseModel& noise) {
    std::vector<DnpPoint> out;
    out.reserve(fields_gauss.size());
    const DensityMatrix start = DensityMatrix::maximally_mixed_full();
    for (double bmag : fields_gauss) {
        const DensityMatrix rho = optical_pump(start, model, p, FieldVector(bmag), pump_time, noise);
        const Eigen::Vector3d n = nuclear_populations(rho);
        out.push_back({bmag, n(0) - n(2), n(0)});
    }
    return out;
}

// ---------------------------------------------------------------- readout

RVector readout_weights(const OpticalModel& model) {
    RVector w(9);
    for (int ms = 1; ms >= -1; --ms)
        for (int mi = 1; mi >= -1; --mi)
            w(product_index(ms, mi)) = (ms == 0 ? 1.0 : 1.0 - model.contrast_electron) *
                                       (mi == 1 ? 1.0 : 1.0 - model.contrast_nuclear);
    return w;
}

ReadoutResult readout(const DensityMatrix& rho, const OpticalModel& model, double window, double shots,
                      bool shot_noise) {
    if (!(window > 0.0)) throw ValidationError("readout: window must be > 0");
    if (!(shots > 0.0)) throw ValidationError("readout: shots must be > 0");
    const DensityMatrix ground = relax_to_ground(rho, model);
    const double rel = readout_weights(model).dot(ground.populations());
    ReadoutResult r;
    r.mean = shots * model.counts_rate_bright * window * rel;
    r.sigma = shot_noise ? std::sqrt(std::max(r.mean, 0.0)) : 0.0;
    return r;
}

} // namespace nvdac
