// linalg.hpp — dense complex matrix helpers: Liouvillian construction and
// exponential propagation by scaling and squaring.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace nvdac {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383280;

// A jump operator together with its rate (1/s). The dissipator is
// rate * (L rho L^dag - 1/2 {L^dag L, rho}).
struct Collapse {
    CMatrix op;
    double rate{0.0};
};

// Column-stacking vectorization: vec(A X B) = (B^T kron A) vec(X).
CVector vectorize(const CMatrix& m);
CMatrix unvectorize(const CVector& v, Eigen::Index dim);

// Generator of d vec(rho)/dt for H given in Hz (the commutator carries 2*pi).
CMatrix liouvillian(const CMatrix& h_hz, const std::vector<Collapse>& collapse);

// Dissipative part only; handy when the coherent part is assembled per block.
CMatrix dissipator(const std::vector<Collapse>& collapse, Eigen::Index dim);

// exp(gen * t). The step is halved until ||gen||_1 * dt <= max_norm_step,
// the short step is summed as a Taylor series and then squared back up.
CMatrix propagator(const CMatrix& gen, double t, double max_norm_step = 0.1);

// Projects a propagator of column-stacked dim x dim states back onto the
// trace-preserving maps, removing the drift that repeated squaring leaves in
// tr(P rho). Only valid for generators that conserve the trace exactly.
void restore_trace_preservation(CMatrix& prop, Eigen::Index dim);

double hermiticity_defect(const CMatrix& m);
double one_norm(const CMatrix& m);
CMatrix kron(const CMatrix& a, const CMatrix& b);

} // namespace nvdac
