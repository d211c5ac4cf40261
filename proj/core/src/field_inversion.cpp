#include "nvdac/field_inversion.hpp"

#include "nvdac/errors.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

namespace nvdac {

namespace {

const std::vector<Eigen::Matrix3d>& symmetry_group() {
    static const std::vector<Eigen::Matrix3d> group = [] {
        const auto& n = nv_axes();
        Eigen::Matrix3d src;
        src << n[0], n[1], n[0].cross(n[1]);
        const Eigen::Matrix3d src_inv = src.inverse();
        std::vector<Eigen::Matrix3d> out;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                if (a == b) continue;
                for (double sa : {1.0, -1.0})
                    for (double sb : {1.0, -1.0})
                        for (double sc : {1.0, -1.0}) {
                            const Eigen::Vector3d ma = sa * n[static_cast<std::size_t>(a)];
                            const Eigen::Vector3d mb = sb * n[static_cast<std::size_t>(b)];
                            if (std::abs(ma.dot(mb) - n[0].dot(n[1])) > 1e-9) continue;
                            Eigen::Matrix3d dst;
                            dst << ma, mb, sc * ma.cross(mb);
                            const Eigen::Matrix3d r = dst * src_inv;
                            if ((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() > 1e-9) continue;
                            bool maps = true;
                            for (const auto& v : n) {
                                const Eigen::Vector3d w = r * v;
                                bool hit = false;
                                for (const auto& u : n) hit |= std::abs(std::abs(w.dot(u)) - 1.0) < 1e-9;
                                maps &= hit;
                            }
                            if (maps) out.push_back(r);
                        }
            }
        // Identity first for a stable ordering.
        std::stable_sort(out.begin(), out.end(), [](const Eigen::Matrix3d& l, const Eigen::Matrix3d& r) {
            return (l - Eigen::Matrix3d::Identity()).norm() < (r - Eigen::Matrix3d::Identity()).norm();
        });
        return out;
    }();
    return group;
}

double wrap_2pi(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

struct Chamfer {
    std::vector<double> observed;
    NVParams p;

    // Nearest-line distances both ways (observed -> predicted, predicted -> observed), in MHz.
    RVector residuals(const Eigen::Vector3d& b) const {
        const std::vector<double> pred = odmr_lines(p, FieldVector::from_cartesian(b));
        RVector r(static_cast<Eigen::Index>(observed.size() + pred.size()));
        Eigen::Index k = 0;
        for (double o : observed) {
            double best = std::numeric_limits<double>::infinity();
            double signed_best = 0.0;
            for (double q : pred)
                if (std::abs(o - q) < best) best = std::abs(o - q), signed_best = o - q;
            r(k++) = signed_best * 1e-6;
        }
        for (double q : pred) {
            double best = std::numeric_limits<double>::infinity();
            double signed_best = 0.0;
            for (double o : observed)
                if (std::abs(o - q) < best) best = std::abs(o - q), signed_best = q - o;
            r(k++) = signed_best * 1e-6;
        }
        return r;
    }
};

struct ChamferFunctor : Eigen::DenseFunctor<double> {
    const Chamfer& c;
    ChamferFunctor(const Chamfer& ch, int values) : Eigen::DenseFunctor<double>(3, values), c(ch) {}
    int operator()(const InputType& x, ValueType& r) const {
        r = c.residuals(x);
        return 0;
    }
    int df(const InputType& x, JacobianType& j) const {
        j.resize(values(), 3);
        for (int k = 0; k < 3; ++k) {
            const double h = 1e-4 * std::max(1.0, x.norm());
            Eigen::Vector3d a = x, b = x;
            a(k) += h;
            b(k) -= h;
            j.col(k) = (c.residuals(a) - c.residuals(b)) / (2.0 * h);
        }
        return 0;
    }
};

Eigen::Vector3d polish(const Chamfer& c, Eigen::Vector3d x, int max_fev) {
    ChamferFunctor f(c, static_cast<int>(c.observed.size() + 8));
    Eigen::LevenbergMarquardt<ChamferFunctor> lm(f);
    lm.setMaxfev(max_fev);
    lm.setXtol(1e-14);
    lm.setFtol(1e-16);
    RVector v = x;
    lm.minimize(v);
    return v;
}

// Field magnitude^2 and parallel component^2 (both in Hz^2, i.e. times gamma_e^2)
// of a single orientation from its two lines, using the invariants of the
// spin-1 Hamiltonian D Sz^2 + b.S: with lambda0 the m_S = 0 level,
// b^2 = D^2 - e2 and b_perp^2 = -lambda0 lambda+ lambda- / D.
bool pair_invariants(double d, double nu1, double nu2, double& b2, double& bz2) {
    const double l0 = (2.0 * d - nu1 - nu2) / 3.0;
    const double e2 = 3.0 * l0 * l0 + 2.0 * l0 * (nu1 + nu2) + nu1 * nu2;
    b2 = d * d - e2;
    const double bx2 = -l0 * (l0 + nu1) * (l0 + nu2) / d;
    bz2 = b2 - bx2;
    const double tol = 1e-3 * std::max(b2, 1.0);
    return b2 > 0.0 && bx2 > -tol && bz2 > -tol;
}

// Closed-form starting fields for eight resolved lines: pair the lines so that
// every pair implies the same |B|, then solve n_k . B = +/- |B| cos(theta_k)
// over axis assignments and signs.
std::vector<Eigen::Vector3d> analytic_starts(const std::vector<double>& lines, double d, double gamma_e) {
    std::vector<Eigen::Vector3d> out;
    if (lines.size() != 8) return out;

    struct Pairing {
        double spread;
        std::array<double, 4> b2;
        std::array<double, 4> bz2;
    };
    std::vector<Pairing> pairings;
    std::array<int, 8> idx{};
    std::array<bool, 8> used{};
    std::function<void(int)> recurse = [&](int depth) {
        if (depth == 4) {
            Pairing pr{};
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (int k = 0; k < 4; ++k) {
                if (!pair_invariants(d, lines[static_cast<std::size_t>(idx[2 * k])],
                                     lines[static_cast<std::size_t>(idx[2 * k + 1])], pr.b2[k], pr.bz2[k]))
                    return;
                lo = std::min(lo, pr.b2[k]);
                hi = std::max(hi, pr.b2[k]);
            }
            pr.spread = (hi - lo) / hi;
            pairings.push_back(pr);
            return;
        }
        int first = 0;
        while (used[static_cast<std::size_t>(first)]) ++first;
        used[static_cast<std::size_t>(first)] = true;
        idx[static_cast<std::size_t>(2 * depth)] = first;
        for (int j = first + 1; j < 8; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            used[static_cast<std::size_t>(j)] = true;
            idx[static_cast<std::size_t>(2 * depth + 1)] = j;
            recurse(depth + 1);
            used[static_cast<std::size_t>(j)] = false;
        }
        used[static_cast<std::size_t>(first)] = false;
    };
    recurse(0);
    std::sort(pairings.begin(), pairings.end(), [](const Pairing& a, const Pairing& b) { return a.spread < b.spread; });

    const auto& n = nv_axes();
    Eigen::Matrix<double, 4, 3> nm;
    for (int k = 0; k < 4; ++k) nm.row(k) = n[static_cast<std::size_t>(k)].transpose();
    const Eigen::Matrix<double, 3, 4> pinv = (nm.transpose() * nm).inverse() * nm.transpose();

    for (std::size_t q = 0; q < std::min<std::size_t>(3, pairings.size()); ++q) {
        const Pairing& pr = pairings[q];
        double b2 = 0.0;
        for (double v : pr.b2) b2 += v / 4.0;
        const double bmag = std::sqrt(b2);
        std::array<double, 4> proj{};
        for (int k = 0; k < 4; ++k) proj[static_cast<std::size_t>(k)] = std::sqrt(std::max(0.0, pr.bz2[k]));

        std::array<int, 4> perm{0, 1, 2, 3};
        double best = std::numeric_limits<double>::infinity();
        Eigen::Vector3d best_b = Eigen::Vector3d::Zero();
        do {
            for (int signs = 0; signs < 8; ++signs) {  // overall sign is a symmetry
                Eigen::Vector4d y;
                for (int k = 0; k < 4; ++k) {
                    const double s = (k > 0 && (signs >> (k - 1)) & 1) ? -1.0 : 1.0;
                    y(k) = s * proj[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
                }
                const Eigen::Vector3d b = pinv * y;
                const double cost = (nm * b - y).squaredNorm() + std::pow(b.norm() - bmag, 2);
                if (cost < best) best = cost, best_b = b;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        out.push_back(best_b / gamma_e);
    }
    return out;
}

} // namespace

std::vector<FieldVector> symmetry_images(const FieldVector& b) {
    std::vector<FieldVector> out;
    const Eigen::Vector3d v = b.cartesian();
    for (const auto& r : symmetry_group()) out.push_back(FieldVector::from_cartesian(r * v));
    return out;
}

FieldVector canonical_field(const FieldVector& b) {
    if (b.magnitude() == 0.0) return FieldVector(0.0);
    constexpr double kTie = 1e-9;
    FieldVector best = b;
    double best_theta = std::numeric_limits<double>::infinity();
    double best_phi = std::numeric_limits<double>::infinity();
    for (const FieldVector& img : symmetry_images(b)) {
        const double th = img.theta();
        const double ph = th < kTie ? 0.0 : wrap_2pi(img.phi());
        if (th < best_theta - kTie || (std::abs(th - best_theta) <= kTie && ph < best_phi - kTie)) {
            best_theta = th;
            best_phi = ph;
            best = img;
        }
    }
    return FieldVector(best.magnitude(), best_theta, best_phi);
}

double symmetric_angle(const FieldVector& a, const FieldVector& b) {
    const Eigen::Vector3d va = a.cartesian().normalized();
    double best = kPi;
    for (const FieldVector& img : symmetry_images(b))
        best = std::min(best, std::acos(std::clamp(va.dot(img.cartesian().normalized()), -1.0, 1.0)));
    return best;
}

FieldFit fit_field_from_odmr(const std::vector<double>& centers, double d_gs, const NVParams& params,
                             double linewidth) {
    if (!(linewidth > 0.0)) throw ValidationError("fit_field_from_odmr: linewidth must be positive");
    if (!(d_gs > 0.0)) throw ValidationError("fit_field_from_odmr: d_gs must be positive");
    if (centers.empty()) throw ValidationError("fit_field_from_odmr: no centers (underdetermined)");
    for (double c : centers)
        if (!std::isfinite(c) || c <= 0.0) throw ValidationError("fit_field_from_odmr: invalid center");

    FieldFit out;
    const bool zero_field =
        std::all_of(centers.begin(), centers.end(), [&](double c) { return std::abs(c - d_gs) < linewidth; });
    if (zero_field) {
        out.field = FieldVector(0.0);
        out.orientation_defined = false;
        double ss = 0.0;
        for (double c : centers) ss += (c - d_gs) * (c - d_gs);
        out.rms_residual = std::sqrt(ss / static_cast<double>(centers.size()));
        return out;
    }
    if (centers.size() < 4)
        throw ValidationError("fit_field_from_odmr: " + std::to_string(centers.size()) +
                              " centers, at least 4 needed (underdetermined)");
    if (centers.size() > 8) throw ValidationError("fit_field_from_odmr: more than 8 centers");

    Chamfer c;
    c.observed = centers;
    std::sort(c.observed.begin(), c.observed.end());
    c.p = params;
    c.p.d_gs = d_gs;

    // Starts: field magnitudes from the widest splitting, directions on a
    // half-sphere grid (B and -B are equivalent).
    const double spread = c.observed.back() - c.observed.front();
    const double b0 = std::max(1.0, 0.5 * spread / params.gamma_e);
    std::vector<Eigen::Vector3d> dirs;
    for (int it = 0; it <= 6; ++it) {
        const double th = (kPi / 2.0) * it / 6.0;
        const int nphi = it == 0 ? 1 : 12;
        for (int ip = 0; ip < nphi; ++ip) {
            const double ph = kTwoPi * ip / nphi;
            dirs.emplace_back(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
        }
    }
    std::vector<std::pair<double, Eigen::Vector3d>> starts;
    for (const auto& d : dirs)
        for (double scale : {0.8, 1.0, 1.15, 1.5}) {
            const Eigen::Vector3d x = d * b0 * scale;
            starts.emplace_back(c.residuals(x).squaredNorm(), x);
        }
    std::sort(starts.begin(), starts.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    starts.resize(std::min<std::size_t>(12, starts.size()));
    for (const Eigen::Vector3d& x : analytic_starts(c.observed, d_gs, params.gamma_e))
        starts.insert(starts.begin(), {c.residuals(x).squaredNorm(), x});
    Eigen::Vector3d best = starts.front().second;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const Eigen::Vector3d x = polish(c, starts[k].second, 100);
        const double cost = c.residuals(x).squaredNorm();
        if (cost < best_cost) best_cost = cost, best = x;
    }
    best = polish(c, best, 2000);
    const RVector r = c.residuals(best);
    out.rms_residual = 1e6 * std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
    if (out.rms_residual > 5.0 * linewidth)
        throw ValidationError("fit_field_from_odmr: model mismatch (rms residual " +
                              std::to_string(out.rms_residual * 1e-6) + " MHz)");

    // Map to the canonical image; carry the covariance through the same rotation.
    const FieldVector raw = FieldVector::from_cartesian(best);
    const FieldVector canon = canonical_field(raw);
    out.field = canon;
    out.orientation_defined = canon.magnitude() > 1e-6 * std::max(1.0, b0);
    {
        const auto& n = nv_axes();
        double proj = -1.0;
        for (int k = 0; k < 4; ++k) {
            const double v = std::abs(canon.cartesian().normalized().dot(n[static_cast<std::size_t>(k)]));
            if (v > proj + 1e-12) proj = v, out.axis = k;
        }
    }

    ChamferFunctor f(c, static_cast<int>(r.size()));
    RMatrix j;
    f.df(best, j);
    const double dof = std::max(1.0, static_cast<double>(r.size()) - 3.0);
    const double s2 = r.squaredNorm() / dof;
    const Eigen::Matrix3d jtj = j.transpose() * j;
    if (std::abs(jtj.determinant()) > 1e-30) {
        const Eigen::Matrix3d cov_raw = s2 * jtj.inverse();
        // Rotation taking the raw solution to the canonical one.
        Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
        for (const auto& g : symmetry_group())
            if ((g * best - canon.cartesian()).norm() <= 1e-6 * std::max(1.0, best.norm())) {
                rot = g;
                break;
            }
        const Eigen::Matrix3d cov = rot * cov_raw * rot.transpose();
        const Eigen::Vector3d v = canon.cartesian();
        const double bm = v.norm();
        const double rho = std::hypot(v.x(), v.y());
        Eigen::Matrix3d jac;  // d(B, theta, phi) / d(bx, by, bz)
        jac.row(0) = v.transpose() / bm;
        if (rho > 1e-12) {
            jac.row(1) << v.x() * v.z() / (bm * bm * rho), v.y() * v.z() / (bm * bm * rho), -rho / (bm * bm);
            jac.row(2) << -v.y() / (rho * rho), v.x() / (rho * rho), 0.0;
        } else {
            jac.row(1) << 1.0 / bm, 1.0 / bm, 0.0;
            jac.row(2).setZero();
        }
        const Eigen::Matrix3d cs = jac * cov * jac.transpose();
        out.sigma_magnitude = std::sqrt(std::max(0.0, cs(0, 0)));
        out.sigma_theta = std::sqrt(std::max(0.0, cs(1, 1)));
        out.sigma_phi = std::sqrt(std::max(0.0, cs(2, 2)));
    } else {
        out.sigma_magnitude = out.sigma_theta = out.sigma_phi = std::numeric_limits<double>::infinity();
    }
    return out;
}

} // namespace nvdac
