#include "nvdac/linalg.hpp"

#include "nvdac/errors.hpp"

#include <cmath>

namespace nvdac {

CVector vectorize(const CMatrix& m) {
    return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvectorize(const CVector& v, Eigen::Index dim) {
    return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

CMatrix dissipator(const std::vector<Collapse>& collapse, Eigen::Index dim) {
    const Eigen::Index n2 = dim * dim;
    CMatrix gen = CMatrix::Zero(n2, n2);
    const CMatrix id = CMatrix::Identity(dim, dim);
    for (const auto& c : collapse) {
        if (c.rate == 0.0) continue;
        const CMatrix& l = c.op;
        const CMatrix ldl = l.adjoint() * l;
        // L rho L^dag -> conj(L) kron L ; {L^dag L, rho} -> I kron LdL + LdL^T kron I
        gen += c.rate * (kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id));
    }
    return gen;
}

CMatrix liouvillian(const CMatrix& h_hz, const std::vector<Collapse>& collapse) {
    const Eigen::Index dim = h_hz.rows();
    const CMatrix id = CMatrix::Identity(dim, dim);
    const cplx mi(0.0, -kTwoPi);
    CMatrix gen = mi * (kron(id, h_hz) - kron(h_hz.transpose(), id));
    gen += dissipator(collapse, dim);
    return gen;
}

double one_norm(const CMatrix& m) {
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

CMatrix propagator(const CMatrix& gen, double t, double max_norm_step) {
    const Eigen::Index n = gen.rows();
    if (t == 0.0 || n == 0) return CMatrix::Identity(n, n);
    const double norm = one_norm(gen) * std::abs(t);
    int squarings = 0;
    double dt = t;
    if (norm > max_norm_step) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / max_norm_step)));
        dt = std::ldexp(t, -squarings);
    }
    const CMatrix a = gen * dt;
    constexpr int kTaylorOrder = 10;
    CMatrix p = CMatrix::Identity(n, n);
    for (int k = kTaylorOrder; k >= 1; --k) {
        p = CMatrix::Identity(n, n) + (a * p) / static_cast<double>(k);
    }
    for (int s = 0; s < squarings; ++s) {
        p = p * p;
    }
    return p;
}

void restore_trace_preservation(CMatrix& prop, Eigen::Index dim) {
    if (prop.rows() != dim * dim || prop.cols() != dim * dim)
        throw ValidationError("restore_trace_preservation: propagator does not match the state dimension");
    // Row functional tr(.) of the output; it must equal the input trace.
    Eigen::RowVectorXcd excess = Eigen::RowVectorXcd::Zero(prop.cols());
    for (Eigen::Index k = 0; k < dim; ++k) excess += prop.row(k * dim + k);
    for (Eigen::Index k = 0; k < dim; ++k) excess(k * dim + k) -= 1.0;
    excess /= static_cast<double>(dim);
    for (Eigen::Index k = 0; k < dim; ++k) prop.row(k * dim + k) -= excess;
}

double hermiticity_defect(const CMatrix& m) {
    const double scale = m.norm();
    const double diff = (m - m.adjoint()).norm();
    return scale > 0.0 ? diff / scale : diff;
}

} // namespace nvdac
