#include <doctest.h>

#include "nvdac/errors.hpp"
#include "nvdac/spinops.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace nvdac;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// Number of distinct values after merging those closer than `tol`.
int distinct(std::vector<double> v, double tol) {
    std::sort(v.begin(), v.end());
    int n = v.empty() ? 0 : 1;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] - v[i - 1] > tol) ++n;
    return n;
}

} // namespace

TEST_SUITE("spinops") {

TEST_CASE("spin-1 operators obey the angular momentum algebra") {
    const OperatorSet s = spin1_operators();
    const cplx i(0.0, 1.0);
    CHECK(max_abs(s.sx * s.sy - s.sy * s.sx - i * s.sz) < 1e-12);
    CHECK(max_abs(s.sy * s.sz - s.sz * s.sy - i * s.sx) < 1e-12);
    CHECK(max_abs(s.sz * s.sx - s.sx * s.sz - i * s.sy) < 1e-12);
    CHECK(max_abs(s.sx * s.sx + s.sy * s.sy + s.sz * s.sz - 2.0 * s.identity) < 1e-12);
    for (const CMatrix* op : {&s.sx, &s.sy, &s.sz}) CHECK(hermiticity_defect(*op) < 1e-15);

    const RVector ev = eigensystem(s.sz).energies;
    CHECK(ev(0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(ev(1)) < 1e-14);
    CHECK(ev(2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("zero-field splitting at ambient") {
    const NVParams p;
    const Hamiltonian h = build_ground_hamiltonian(p, FieldVector(0.0));
    // Hyperfine-averaged gap of the m_I = 0 states equals D exactly.
    const double gap = transition_frequency(h, {0, 0}, {-1, 0});
    CHECK(std::abs(gap - 2.87e9) < 3e6);
}

TEST_CASE("Hamiltonian builders are Hermitian for random inputs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        NVParams p;
        p.q = -4.0e6 - 1.5e6 * u(rng);
        p.a_par = (u(rng) < 0.5 ? -1 : 1) * (1.5e6 + u(rng) * 1e6);
        p.a_perp = 5e6 * (u(rng) - 0.5);
        const FieldVector b(1000.0 * u(rng), kPi * u(rng), kTwoPi * u(rng));
        const Hamiltonian g = build_ground_hamiltonian(p, b);
        const Hamiltonian e = build_excited_hamiltonian(p, b);
        CHECK(g.dim() == 9);
        CHECK(g.labels().size() == 9);
        CHECK(hermiticity_defect(g.matrix()) <= 1e-9 * g.matrix().norm());
        CHECK(hermiticity_defect(e.matrix()) <= 1e-9 * e.matrix().norm());
    }
}

TEST_CASE("nuclear lines in m_S = 0 follow the closed form within second order") {
    // Second-order bound for the transverse hyperfine: the m_S = 0 levels couple
    // to m_S = +/-1 partners at D -/+ gamma_e B, so the closest partner sets the scale.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 700.0);
    const NVParams p;
    for (int trial = 0; trial < 50; ++trial) {
        const double b = u(rng);
        const Hamiltonian h = build_ground_hamiltonian(p, FieldVector(b));
        const double bound = 2.0 * p.a_perp * p.a_perp / (p.d_gs - p.gamma_e * b);
        for (auto [m1, m2] : {std::pair{1, 0}, std::pair{0, -1}, std::pair{1, -1}}) {
            const double exact = transition_frequency(h, {0, m1}, {0, m2});
            const double closed = std::abs(p.q * (m1 * m1 - m2 * m2) - p.gamma_n * b * (m1 - m2));
            CHECK(std::abs(exact - closed) <= bound);
        }
    }
}

TEST_CASE("eigenvalues are invariant under basis phase and permutation") {
    const NVParams p;
    const Hamiltonian h = build_ground_hamiltonian(p, FieldVector(460.0, 0.3, 1.1));
    const RVector e0 = eigensystem(h).energies;

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    CMatrix phase = CMatrix::Zero(9, 9);
    for (int k = 0; k < 9; ++k) phase(k, k) = std::polar(1.0, u(rng));
    std::vector<int> perm{4, 2, 7, 0, 8, 1, 6, 3, 5};
    CMatrix pm = CMatrix::Zero(9, 9);
    for (int k = 0; k < 9; ++k) pm(k, perm[k]) = 1.0;
    const CMatrix u_total = pm * phase;
    const RVector e1 = eigensystem(CMatrix(u_total * h.matrix() * u_total.adjoint())).energies;
    const RVector e2 = eigensystem(CMatrix(std::polar(1.0, 0.7) * h.matrix() * std::polar(1.0, -0.7))).energies;
    CHECK((e0 - e1).cwiseAbs().maxCoeff() < 1e-4);
    CHECK((e0 - e2).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("ODMR line degeneracy at 460 G") {
    const NVParams p;
    auto count = [&](double theta_deg) {
        return distinct(odmr_lines(p, FieldVector(460.0, theta_deg * kPi / 180.0, 0.4)), 1.0);
    };
    CHECK(count(0.0) == 4);
    // Along any of the other three axes the pattern is the same.
    for (int axis = 1; axis < 4; ++axis) {
        const FieldVector b = FieldVector::from_cartesian(460.0 * nv_axes()[axis]);
        CHECK(distinct(odmr_lines(p, b), 1.0) == 4);
    }
    for (double deg : {0.2, 1.0, 5.0, 30.0}) CHECK(count(deg) == 8);
}

TEST_CASE("field in the axis frame keeps the magnitude") {
    const FieldVector b(300.0, 0.8, 2.0);
    for (int axis = 0; axis < 4; ++axis) {
        const FieldVector f = field_in_axis_frame(b, axis);
        CHECK(f.magnitude() == doctest::Approx(300.0));
        CHECK(std::cos(f.theta()) == doctest::Approx(b.cartesian().normalized().dot(nv_axes()[axis])));
    }
}

TEST_CASE("parameter validation names the field") {
    NVParams p;
    p.q = -7e6;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("q"), ValidationError);
    CHECK_NOTHROW(p.validate(false));
    p = NVParams{};
    p.gamma_n = -1.0;
    CHECK_THROWS_AS(p.validate(false), ValidationError);
}

TEST_CASE("eigenstate labels and mixing") {
    const NVParams p;
    const Hamiltonian h = build_ground_hamiltonian(p, FieldVector(460.0));
    const Eigensystem es = eigensystem(h);
    std::vector<Eigen::Index> seen;
    for (int ms : {1, 0, -1})
        for (int mi : {1, 0, -1}) seen.push_back(eigenstate_for(h, es, {ms, mi}));
    std::sort(seen.begin(), seen.end());
    CHECK(std::unique(seen.begin(), seen.end()) == seen.end());
    CHECK(product_index(1, 1) == 0);
    CHECK(product_index(-1, -1) == 8);
    CHECK(product_index(0, 1) == 3);
}

} // TEST_SUITE
