#include "nvdac/frame.hpp"

#include "nvdac/errors.hpp"
#include "optical_generator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nvdac {

namespace {

constexpr double kFrameTolHz = 1e-3;
constexpr double kElementTol = 1e-6;

int dominant_mi(const CMatrix& states, Eigen::Index col) {
    std::array<double, 3> w{};
    for (int ms = 1; ms >= -1; --ms)
        for (int mi = 1; mi >= -1; --mi) w[1 - mi] += std::norm(states(product_index(ms, mi), col));
    const auto idx = std::max_element(w.begin(), w.end()) - w.begin();
    return 1 - static_cast<int>(idx);
}

CMatrix drive_operator(DriveKind kind) {
    const OperatorSet s = spin1_operators();
    return kind == DriveKind::mw ? kron(s.sx, s.identity) : kron(s.identity, s.sx);
}

} // namespace

RotatingFrame::RotatingFrame(const Hamiltonian& ground, const Drive& drive) : drive_(drive) {
    if (ground.dim() != kGroundDim) throw ValidationError("RotatingFrame: expects the 9-dim ground Hamiltonian");
    if (!(drive.frequency >= 0.0) || !(drive.rabi >= 0.0) || !std::isfinite(drive.phase))
        throw ValidationError("RotatingFrame: drive frequency and Rabi frequency must be >= 0");
    es_ = eigensystem(ground);
    const RVector& e = es_.energies;

    std::array<double, 3> cmean{};
    for (Eigen::Index k = 0; k < 9; ++k) cmean[static_cast<std::size_t>(k / 3)] += e(k) / 3.0;
    auto cluster = [](Eigen::Index k) { return static_cast<int>(k / 3); };

    const double f = drive.frequency;
    phi_.resize(9);
    Eigen::Matrix<bool, 9, 9> kept;
    kept.setConstant(false);

    if (drive.kind == DriveKind::mw) {
        int a = 0, b = 1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                const double d = std::abs((cmean[j] - cmean[i]) - f);
                if (d < best) best = d, a = i, b = j;
            }
        for (Eigen::Index k = 0; k < 9; ++k) {
            const int c = cluster(k);
            phi_(k) = c == a ? cmean[a] : c == b ? cmean[a] + f : cmean[c];
        }
        for (Eigen::Index k = 0; k < 9; ++k)
            for (Eigen::Index l = 0; l < 9; ++l) kept(k, l) = cluster(k) == a && cluster(l) == b;
    } else {
        // Within each electron manifold the m_I = 0 level is the top one whenever
        // |q| > |a_par| + gamma_n B, so n = 1 - m_I^2 labels the upper level.
        std::array<int, 9> n{};
        for (Eigen::Index k = 0; k < 9; ++k) {
            const int mi = dominant_mi(es_.states, k);
            n[static_cast<std::size_t>(k)] = 1 - mi * mi;
            phi_(k) = cmean[static_cast<std::size_t>(cluster(k))] + f * n[static_cast<std::size_t>(k)];
        }
        for (Eigen::Index k = 0; k < 9; ++k)
            for (Eigen::Index l = 0; l < 9; ++l)
                kept(k, l) = cluster(k) == cluster(l) && n[static_cast<std::size_t>(k)] == 0 &&
                             n[static_cast<std::size_t>(l)] == 1;
    }

    const CMatrix op = es_.states.adjoint() * drive_operator(drive.kind) * es_.states;
    h_rot_ = CMatrix::Zero(9, 9);
    for (Eigen::Index k = 0; k < 9; ++k) h_rot_(k, k) = e(k) - phi_(k);
    const cplx coupling = (drive.rabi / std::sqrt(2.0)) * std::polar(1.0, drive.phase);
    for (Eigen::Index k = 0; k < 9; ++k)
        for (Eigen::Index l = 0; l < 9; ++l)
            if (kept(k, l)) {
                h_rot_(k, l) += coupling * op(k, l);
                h_rot_(l, k) += std::conj(coupling * op(k, l));
            }

    static_mask_ = RMatrix::Zero(9, 9);
    for (Eigen::Index k = 0; k < 9; ++k)
        for (Eigen::Index l = 0; l < 9; ++l)
            static_mask_(k, l) = std::abs(phi_(k) - phi_(l)) < kFrameTolHz ? 1.0 : 0.0;

    double min_detuning = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < 9; ++k)
        for (Eigen::Index l = k + 1; l < 9; ++l) {
            if (std::abs(op(k, l)) < kElementTol) continue;
            const double nu = std::abs(e(l) - e(k));
            const bool co_rotating = kept(k, l) || kept(l, k);
            const double detuning = co_rotating ? nu + f : std::abs(nu - f);
            min_detuning = std::min(min_detuning, detuning);
        }
    rwa_ratio_ = drive.rabi > 0.0 ? drive.rabi / min_detuning : 0.0;
}

std::vector<Collapse> RotatingFrame::secular(const std::vector<Collapse>& lab_ops) const {
    std::vector<Collapse> out;
    for (const auto& c : lab_ops) {
        const CMatrix l = es_.states.adjoint() * c.op * es_.states;
        const double scale = l.cwiseAbs().maxCoeff();
        std::vector<double> freqs;
        std::vector<CMatrix> parts;
        for (Eigen::Index k = 0; k < 9; ++k)
            for (Eigen::Index j = 0; j < 9; ++j) {
                if (std::abs(l(k, j)) <= 1e-14 * scale) continue;
                const double w = phi_(k) - phi_(j);
                std::size_t g = 0;
                while (g < freqs.size() && std::abs(freqs[g] - w) >= kFrameTolHz) ++g;
                if (g == freqs.size()) {
                    freqs.push_back(w);
                    parts.push_back(CMatrix::Zero(9, 9));
                }
                parts[g](k, j) = l(k, j);
            }
        for (auto& p : parts) out.push_back({std::move(p), c.rate});
    }
    return out;
}

CMatrix RotatingFrame::to_frame(const CMatrix& rho_product, double t) const {
    CMatrix r = es_.states.adjoint() * rho_product * es_.states;
    for (Eigen::Index k = 0; k < 9; ++k)
        for (Eigen::Index l = 0; l < 9; ++l)
            if (k != l) r(k, l) *= std::polar(1.0, kTwoPi * std::fmod((phi_(k) - phi_(l)) * t, 1.0));
    return r;
}

CMatrix RotatingFrame::from_frame(const CMatrix& rho_rot, double t) const {
    CMatrix r = rho_rot;
    for (Eigen::Index k = 0; k < 9; ++k)
        for (Eigen::Index l = 0; l < 9; ++l)
            if (k != l) r(k, l) *= std::polar(1.0, -kTwoPi * std::fmod((phi_(k) - phi_(l)) * t, 1.0));
    return es_.states * r * es_.states.adjoint();
}

CMatrix pulse_propagator(const RotatingFrame& frame, const NoiseModel& noise, double duration) {
    if (duration < 0.0) throw ValidationError("pulse duration must be >= 0");
    noise.validate();
    const CMatrix gen = liouvillian(frame.hamiltonian(), frame.secular(ground_noise_collapse(noise, frame.eigen())));
    CMatrix prop = propagator(gen, duration);
    restore_trace_preservation(prop, kGroundDim);
    return prop;
}

PulseResult apply_pulse_propagator(const DensityMatrix& rho, const RotatingFrame& frame,
                                   const CMatrix& prop, double t_start, double duration) {
    if (rho.dim() != kGroundDim) throw ValidationError("coherent_pulse: expects a 9-dim ground state");
    const CMatrix r = frame.to_frame(rho.matrix(), t_start);
    const CMatrix out = unvectorize(prop * vectorize(r), 9);
    return {DensityMatrix::unchecked(frame.from_frame(out, t_start + duration)), frame.rwa_warning(),
            frame.rwa_ratio()};
}

PulseResult coherent_pulse(const DensityMatrix& rho, const RotatingFrame& frame, double duration,
                           const NoiseModel& noise, double t_start) {
    return apply_pulse_propagator(rho, frame, pulse_propagator(frame, noise, duration), t_start, duration);
}

DensityMatrix coherent_pulse_lab(const DensityMatrix& rho, const Hamiltonian& ground, const Drive& drive,
                                 double duration, double t_start, int steps_per_period) {
    if (rho.dim() != kGroundDim) throw ValidationError("coherent_pulse_lab: expects a 9-dim ground state");
    if (!(drive.frequency > 0.0) || steps_per_period < 4)
        throw ValidationError("coherent_pulse_lab: needs a carrier and >= 4 steps per period");
    const CMatrix op = drive_operator(drive.kind);
    const auto steps = static_cast<long>(std::ceil(duration * drive.frequency * steps_per_period));
    const double dt = duration / static_cast<double>(std::max(steps, 1L));
    CMatrix m = rho.matrix();
    for (long s = 0; s < steps; ++s) {
        const double t = t_start + (static_cast<double>(s) + 0.5) * dt;
        const CMatrix h = ground.matrix() + std::sqrt(2.0) * drive.rabi *
                                                std::cos(kTwoPi * drive.frequency * t + drive.phase) * op;
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
        const CVector phases = (cplx(0.0, -kTwoPi * dt) * solver.eigenvalues().cast<cplx>()).array().exp();
        const CMatrix u = solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
        m = u * m * u.adjoint();
    }
    return DensityMatrix::unchecked(std::move(m));
}

DensityMatrix cw_steady_state(const OpticalModel& model, const NVParams& p, const FieldVector& b,
                              const NoiseModel& noise, const Drive& drive) {
    model.validate();
    noise.validate();
    const RotatingFrame frame(build_ground_hamiltonian(p, b), drive);
    detail::GroundBlock g;
    g.hamiltonian = frame.hamiltonian();
    g.noise = frame.secular(ground_noise_collapse(noise, frame.eigen()));
    g.to_product = frame.eigen().states;
    g.static_mask = frame.static_mask();
    OpticalModel weak = model;
    weak.pump_rate = model.cw_pump_rate;
    CMatrix gen = detail::optical_generator(weak, p, b, g, true);

    // Replace the first balance equation by the trace condition.
    constexpr Eigen::Index n = OpticalCycle::kBlockDim;
    gen.row(0).setZero();
    for (Eigen::Index i = 0; i < 9; ++i) gen(0, i * 9 + i) = 1.0;
    for (Eigen::Index i = 0; i < 9; ++i) gen(0, 81 + i * 9 + i) = 1.0;
    for (Eigen::Index i = 0; i < 3; ++i) gen(0, 162 + i * 3 + i) = 1.0;
    CVector rhs = CVector::Zero(n);
    rhs(0) = 1.0;
    const CVector x = gen.partialPivLu().solve(rhs);

    DensityMatrix rot = OpticalCycle::unpack(x);
    CMatrix m = rot.matrix();
    m.topLeftCorner(9, 9) = frame.from_frame(m.topLeftCorner(9, 9), 0.0);
    return DensityMatrix::unchecked(std::move(m));
}

} // namespace nvdac
