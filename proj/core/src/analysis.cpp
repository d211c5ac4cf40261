#include "nvdac/analysis.hpp"

#include "nvdac/errors.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <tuple>

namespace nvdac {

double FitResult::value(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return params(static_cast<Eigen::Index>(i));
    throw ValidationError("FitResult has no parameter '" + std::string(name) + "'");
}

double FitResult::sigma(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return sigmas(static_cast<Eigen::Index>(i));
    throw ValidationError("FitResult has no parameter '" + std::string(name) + "'");
}

bool FitResult::has_flag(std::string_view flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

namespace {

constexpr int kMaxIterations = 500;
constexpr double kInf = std::numeric_limits<double>::infinity();

using Model = std::function<double(double, const RVector&)>;

// Least-squares problem in normalized coordinates u = (x - x0) / scale.
struct Problem {
    RVector u;
    RVector y;
    RVector w;  // 1 / sigma, or ones
    bool weighted{true};
    Model model;
    RVector full;                 // all parameters, fixed ones included
    std::vector<Eigen::Index> free;

    RVector expand(const RVector& p) const {
        RVector f = full;
        for (std::size_t i = 0; i < free.size(); ++i) f(free[i]) = p(static_cast<Eigen::Index>(i));
        return f;
    }
    void residuals(const RVector& p, RVector& r) const {
        const RVector f = expand(p);
        r.resize(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) r(i) = (y(i) - model(u(i), f)) * w(i);
    }
    RMatrix jacobian(const RVector& p) const {
        RMatrix j(u.size(), p.size());
        RVector rp, rm;
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            const double h = 1e-6 * std::max(std::abs(p(k)), 1e-3);
            RVector a = p, b = p;
            a(k) += h;
            b(k) -= h;
            residuals(a, rp);
            residuals(b, rm);
            j.col(k) = (rp - rm) / (2.0 * h);
        }
        return j;
    }
};

struct Functor : Eigen::DenseFunctor<double> {
    const Problem& prob;
    Functor(const Problem& p, int n_free)
        : Eigen::DenseFunctor<double>(n_free, static_cast<int>(p.u.size())), prob(p) {}
    int operator()(const InputType& p, ValueType& r) const {
        prob.residuals(p, r);
        return 0;
    }
    int df(const InputType& p, JacobianType& j) const {
        j = prob.jacobian(p);
        return 0;
    }
};

struct Solved {
    RVector params;     // full vector
    RMatrix covariance; // full size; zero rows/cols for fixed parameters
    double reduced_chi2{0.0};
    bool converged{false};
    int iterations{0};
    bool singular{false};
};

Solved solve(Problem& prob) {
    const auto n_free = static_cast<Eigen::Index>(prob.free.size());
    RVector p(n_free);
    for (Eigen::Index i = 0; i < n_free; ++i) p(i) = prob.full(prob.free[static_cast<std::size_t>(i)]);

    Functor functor(prob, static_cast<int>(n_free));
    Eigen::LevenbergMarquardt<Functor> lm(functor);
    lm.setMaxfev(kMaxIterations);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    lm.setGtol(0.0);
    const auto status = lm.minimize(p);

    Solved out;
    out.params = prob.expand(p);
    out.iterations = static_cast<int>(lm.iterations());
    out.converged = status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
                    status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters && p.allFinite();

    RVector r;
    prob.residuals(p, r);
    const double dof = static_cast<double>(std::max<Eigen::Index>(1, prob.u.size() - n_free));
    out.reduced_chi2 = r.squaredNorm() / dof;

    const Eigen::Index n = prob.full.size();
    out.covariance = RMatrix::Zero(n, n);
    if (out.converged) {
        const RMatrix j = prob.jacobian(p);
        const RMatrix jtj = j.transpose() * j;
        Eigen::SelfAdjointEigenSolver<RMatrix> es(jtj);
        const double top = es.eigenvalues().cwiseAbs().maxCoeff();
        out.singular = !(es.eigenvalues().minCoeff() > 1e-13 * top);
        RMatrix cov = out.singular ? RMatrix(RMatrix::Constant(n_free, n_free, kInf))
                                   : RMatrix(jtj.inverse());
        if (!prob.weighted) cov *= out.reduced_chi2;
        for (Eigen::Index a = 0; a < n_free; ++a)
            for (Eigen::Index b = 0; b < n_free; ++b)
                out.covariance(prob.free[static_cast<std::size_t>(a)], prob.free[static_cast<std::size_t>(b)]) =
                    cov(a, b);
    }
    return out;
}

struct Axis {
    double origin{0.0};
    double scale{1.0};
};

Axis normalize(const std::vector<double>& x) {
    const double lo = x.front();
    const double span = x.back() - x.front();
    return {lo, span > 0.0 ? span : 1.0};
}

Problem make_problem(const Spectrum& s, const Axis& ax, Model model, RVector p0) {
    Problem prob;
    const auto n = static_cast<Eigen::Index>(s.size());
    prob.u.resize(n);
    prob.y.resize(n);
    prob.w.resize(n);
    const bool any_zero = std::any_of(s.sigma.begin(), s.sigma.end(), [](double v) { return v == 0.0; });
    prob.weighted = !any_zero;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        prob.u(i) = (s.x[k] - ax.origin) / ax.scale;
        prob.y(i) = s.y[k];
        prob.w(i) = prob.weighted ? 1.0 / s.sigma[k] : 1.0;
    }
    prob.model = std::move(model);
    prob.full = std::move(p0);
    for (Eigen::Index i = 0; i < prob.full.size(); ++i) prob.free.push_back(i);
    return prob;
}

// Converts a normalized-coordinate solution to physical units: p_phys = p * scale + shift.
FitResult finish(const Solved& s, std::vector<std::string> names, const RVector& scale, const RVector& shift,
                 bool weighted) {
    FitResult r;
    r.names = std::move(names);
    r.params = s.params.cwiseProduct(scale) + shift;
    r.converged = s.converged;
    r.iterations = s.iterations;
    r.reduced_chi2 = s.reduced_chi2;
    if (!weighted) r.flags.emplace_back("unweighted");
    if (!s.converged) {
        r.flags.emplace_back("not_converged");
        r.sigmas = RVector::Constant(r.params.size(), kInf);
        return r;
    }
    if (s.singular) r.flags.emplace_back("singular_covariance");
    r.covariance = scale.asDiagonal() * s.covariance * scale.asDiagonal();
    r.sigmas = r.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return r;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

// Point-to-point noise estimate independent of slow structure.
double noise_level(const Spectrum& s) {
    std::vector<double> sig;
    for (double v : s.sigma)
        if (v > 0.0) sig.push_back(v);
    if (!sig.empty()) return median(sig);
    std::vector<double> d;
    for (std::size_t i = 2; i < s.size(); ++i) d.push_back(std::abs(s.y[i] - 2.0 * s.y[i - 1] + s.y[i - 2]));
    return 1.4826 * median(d) / std::sqrt(6.0);
}

std::vector<double> moving_average(const std::vector<double>& y, int window) {
    const int half = window / 2;
    const int n = static_cast<int>(y.size());
    std::vector<double> out(y.size());
    for (int i = 0; i < n; ++i) {
        const int a = std::max(0, i - half);
        const int b = std::min(n - 1, i + half);
        double sum = 0.0;
        for (int k = a; k <= b; ++k) sum += y[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(i)] = sum / (b - a + 1);
    }
    return out;
}

void check_spectrum(const Spectrum& s, std::size_t min_points) {
    s.validate();
    if (s.size() < min_points)
        throw ValidationError("fit needs at least " + std::to_string(min_points) + " points, got " +
                              std::to_string(s.size()));
}

} // namespace

// ---------------------------------------------------------------- Lorentzian

double lorentzian_model(double x, const RVector& p) {
    double y = p(0);
    for (Eigen::Index i = 1; i + 2 < p.size(); i += 3) {
        const double hw = 0.5 * p(i + 2);
        const double d = x - p(i + 1);
        y -= p(i) * hw * hw / (d * d + hw * hw);
    }
    return y;
}

namespace {

LorentzianInit auto_init(const Spectrum& s, int n_dips) {
    const std::vector<double> ys = moving_average(s.y, 5);
    const double base = median(s.y);
    const double noise = noise_level(s) / std::sqrt(5.0);
    const double threshold = std::max(4.0 * noise, 1e-12 * std::max(1.0, std::abs(base)));

    struct Cand {
        std::size_t i;
        double depth;
    };
    std::vector<Cand> cands;
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i >= 2 ? i - 2 : 0;
        const std::size_t b = std::min(n - 1, i + 2);
        bool is_min = true;
        for (std::size_t k = a; k <= b; ++k)
            if (ys[k] < ys[i] || (ys[k] == ys[i] && k < i)) is_min = false;
        const double depth = base - ys[i];
        if (is_min && depth > threshold) cands.push_back({i, depth});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& l, const Cand& r) { return l.depth > r.depth; });

    // Half-depth crossings give the width; candidates inside an accepted dip are discarded.
    LorentzianInit init;
    init.baseline = base;
    std::vector<std::pair<double, double>> taken;
    for (const Cand& c : cands) {
        if (static_cast<int>(init.centers.size()) == n_dips) break;
        const double half = base - 0.5 * c.depth;
        std::size_t lo = c.i, hi = c.i;
        while (lo > 0 && ys[lo] < half) --lo;
        while (hi + 1 < n && ys[hi] < half) ++hi;
        const double xc = s.x[c.i];
        bool inside = false;
        for (const auto& [a, b] : taken) inside |= xc >= a && xc <= b;
        if (inside) continue;
        const double step = (s.x.back() - s.x.front()) / static_cast<double>(n - 1);
        const double fwhm = std::max(s.x[hi] - s.x[lo], 2.0 * step);
        taken.emplace_back(xc - fwhm, xc + fwhm);
        init.centers.push_back(xc);
        init.fwhms.push_back(fwhm);
        init.amplitudes.push_back(c.depth);
    }
    if (static_cast<int>(init.centers.size()) < n_dips)
        throw InitializationError("found " + std::to_string(init.centers.size()) + " significant dip(s), " +
                                  std::to_string(n_dips) + " requested");
    return init;
}

} // namespace

FitResult fit_lorentzian(const Spectrum& spec, int n_dips, const std::optional<LorentzianInit>& init_in) {
    if (n_dips < 1) throw ValidationError("fit_lorentzian: n_dips must be >= 1");
    check_spectrum(spec, static_cast<std::size_t>(5 * (3 * n_dips + 1)));
    const LorentzianInit init = init_in ? *init_in : auto_init(spec, n_dips);
    if (init.centers.size() != static_cast<std::size_t>(n_dips) || init.amplitudes.size() != init.centers.size() ||
        init.fwhms.size() != init.centers.size())
        throw ValidationError("fit_lorentzian: init must provide n_dips amplitudes, centers and widths");

    const Axis ax = normalize(spec.x);
    const Eigen::Index np = 1 + 3 * n_dips;
    RVector p0(np);
    p0(0) = init.baseline;
    for (int i = 0; i < n_dips; ++i) {
        const auto k = static_cast<std::size_t>(i);
        p0(1 + 3 * i) = init.amplitudes[k];
        p0(2 + 3 * i) = (init.centers[k] - ax.origin) / ax.scale;
        p0(3 + 3 * i) = init.fwhms[k] / ax.scale;
    }
    Problem prob = make_problem(spec, ax, lorentzian_model, p0);
    Solved sol = solve(prob);

    // Canonical form: positive widths, dips ordered by center.
    std::vector<int> order(static_cast<std::size_t>(n_dips));
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < n_dips; ++i) sol.params(3 + 3 * i) = std::abs(sol.params(3 + 3 * i));
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return sol.params(2 + 3 * a) < sol.params(2 + 3 * b); });
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(np);
    perm.indices()(0) = 0;
    for (int i = 0; i < n_dips; ++i)
        for (int j = 0; j < 3; ++j) perm.indices()(1 + 3 * i + j) = 1 + 3 * order[static_cast<std::size_t>(i)] + j;
    RVector sorted(np);
    RMatrix cov(np, np);
    for (Eigen::Index a = 0; a < np; ++a) {
        sorted(a) = sol.params(perm.indices()(a));
        for (Eigen::Index b = 0; b < np; ++b) cov(a, b) = sol.covariance(perm.indices()(a), perm.indices()(b));
    }
    sol.params = sorted;
    sol.covariance = cov;

    std::vector<std::string> names{"baseline"};
    RVector scale = RVector::Ones(np);
    RVector shift = RVector::Zero(np);
    for (int i = 0; i < n_dips; ++i) {
        const std::string k = std::to_string(i);
        names.push_back("amplitude_" + k);
        names.push_back("center_" + k);
        names.push_back("fwhm_" + k);
        scale(2 + 3 * i) = ax.scale;
        shift(2 + 3 * i) = ax.origin;
        scale(3 + 3 * i) = ax.scale;
    }
    return finish(sol, std::move(names), scale, shift, prob.weighted);
}

// ---------------------------------------------------------------- damped cosine

namespace {

double cosine_model(double u, const RVector& p) {
    // offset, amplitude, frequency, decay rate, phase
    return p(0) + p(1) * std::exp(-p(3) * u) * std::cos(kTwoPi * p(2) * u + p(4));
}

struct Dft {
    double frequency{0.0};
    double amplitude{0.0};
    double phase{0.0};
    double dominance{0.0};
};

// Dominant component of the linearly detrended trace on a 4x zero-padded grid
// (frequencies in cycles per unit u).
Dft dominant_frequency(const RVector& u, const RVector& y) {
    const auto n = u.size();
    const double mu = u.mean();
    const double my = y.mean();
    const double suu = (u.array() - mu).square().sum();
    const double slope = suu > 0.0 ? ((u.array() - mu) * (y.array() - my)).sum() / suu : 0.0;
    const RVector d = (y.array() - my - slope * (u.array() - mu)).matrix();
    if (d.norm() == 0.0) throw InitializationError("flat trace: no dominant frequency");

    const double nyquist = 0.5 * static_cast<double>(n - 1);
    const double df = 0.25;
    std::vector<double> power;
    std::vector<cplx> coeff;
    for (double f = df; f <= nyquist; f += df) {
        cplx c{0.0, 0.0};
        for (Eigen::Index i = 0; i < n; ++i) c += d(i) * std::polar(1.0, -kTwoPi * f * u(i));
        coeff.push_back(c);
        power.push_back(std::norm(c));
    }
    if (power.empty()) throw InitializationError("trace too short for a frequency estimate");
    const auto best = static_cast<std::size_t>(std::max_element(power.begin(), power.end()) - power.begin());
    double rest = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < power.size(); ++k)
        if (k + 8 < best || k > best + 8) rest += power[k], ++count;
    Dft out;
    out.frequency = df * static_cast<double>(best + 1);
    out.amplitude = 2.0 * std::abs(coeff[best]) / static_cast<double>(n);
    out.phase = std::arg(coeff[best]);
    out.dominance = count ? power[best] / (rest / static_cast<double>(count)) : kInf;
    return out;
}

} // namespace

FitResult fit_damped_cosine(const TimeTrace& trace, const CosineInit& init) {
    check_spectrum(trace, 6);
    const Axis ax{trace.x.front(), trace.x.back() - trace.x.front()};
    Problem prob = make_problem(trace, ax, cosine_model, RVector::Zero(5));

    double f0 = 0.0, a0 = 0.0, ph0 = 0.0;
    if (init.frequency) {
        f0 = *init.frequency * ax.scale;
    } else {
        const Dft dft = dominant_frequency(prob.u, prob.y);
        if (dft.dominance < 10.0) throw InitializationError("no dominant frequency in trace");
        f0 = dft.frequency;
        a0 = dft.amplitude;
        ph0 = dft.phase;
    }
    const double offset0 = init.offset.value_or(prob.y.mean());
    if (!init.amplitude && a0 == 0.0) a0 = std::sqrt(2.0) * std::sqrt((prob.y.array() - offset0).square().mean());
    // Phase from a linear projection at the chosen frequency when not given.
    if (!init.phase) {
        double sc = 0.0, ss = 0.0;
        for (Eigen::Index i = 0; i < prob.u.size(); ++i) {
            sc += (prob.y(i) - offset0) * std::cos(kTwoPi * f0 * prob.u(i));
            ss += (prob.y(i) - offset0) * std::sin(kTwoPi * f0 * prob.u(i));
        }
        ph0 = std::atan2(-ss, sc);
    }
    const double rate0 = init.decay_time ? ax.scale / *init.decay_time : 1.0;
    prob.full << offset0, init.amplitude.value_or(a0), f0, rate0, init.phase.value_or(ph0);

    Solved sol = solve(prob);
    RVector& p = sol.params;
    if (p(1) < 0.0) {
        p(1) = -p(1);
        p(4) += kPi;
        sol.covariance.row(1) *= -1.0;
        sol.covariance.col(1) *= -1.0;
    }
    p(4) = std::remainder(p(4), kTwoPi);

    // Report decay time instead of rate: T = scale / rate, capped at 100 spans.
    constexpr double kMaxSpans = 100.0;
    const double rate = p(3);
    const bool at_bound = !(rate > 1.0 / kMaxSpans);
    RVector phys(5);
    phys << p(0), p(1), p(2) / ax.scale, at_bound ? kMaxSpans * ax.scale : ax.scale / rate, p(4);
    RVector jac(5);
    jac << 1.0, 1.0, 1.0 / ax.scale, at_bound ? 0.0 : -ax.scale / (rate * rate), 1.0;

    FitResult r;
    r.names = {"offset", "amplitude", "frequency", "decay_time", "phase"};
    r.params = phys;
    r.converged = sol.converged;
    r.iterations = sol.iterations;
    r.reduced_chi2 = sol.reduced_chi2;
    if (!prob.weighted) r.flags.emplace_back("unweighted");
    if (at_bound) r.flags.emplace_back("decay_at_bound");
    if (!sol.converged) {
        r.flags.emplace_back("not_converged");
        r.sigmas = RVector::Constant(5, kInf);
        return r;
    }
    if (sol.singular) r.flags.emplace_back("singular_covariance");
    r.covariance = jac.asDiagonal() * sol.covariance * jac.asDiagonal();
    r.sigmas = r.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    if (at_bound) r.sigmas(3) = kInf;
    return r;
}

// ---------------------------------------------------------------- exponential

namespace {

double exp_model(double u, const RVector& p) { return p(0) + p(1) * std::exp(-p(2) * u); }

} // namespace

FitResult fit_exponential(const TimeTrace& trace, const ExponentialInit& init) {
    const std::size_t min_points = init.fix_offset ? 2 : 3;
    check_spectrum(trace, min_points);
    const Axis ax{trace.x.front(), trace.x.back() - trace.x.front()};
    Problem prob = make_problem(trace, ax, exp_model, RVector::Zero(3));
    const auto n = prob.y.size();
    const Eigen::Index tail = std::max<Eigen::Index>(1, n / 10);

    const double off0 = init.offset.value_or(prob.y.tail(tail).mean());
    const double head = prob.y.head(tail).mean();
    double a0 = init.amplitude.value_or(head - off0);
    double rate0 = 3.0;
    if (init.decay_time) {
        rate0 = ax.scale / *init.decay_time;
    } else if (a0 != 0.0) {
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::abs(prob.y(i) - off0) < std::abs(a0) / std::exp(1.0)) {
                rate0 = prob.u(i) > 0.0 ? 1.0 / prob.u(i) : rate0;
                break;
            }
    }
    // The fit runs on u measured from the first sample; amplitude refers to t = x0.
    prob.full << off0, a0, rate0;
    if (init.fix_offset) prob.free = {1, 2};

    const double noise = noise_level(trace);
    const bool identifiable = std::abs(a0) > 2.0 * noise && std::abs(a0) > 0.0;

    Solved sol = solve(prob);
    const RVector& p = sol.params;
    const double rate = p(2);
    const bool resolved = identifiable && rate > 0.0 && std::isfinite(rate);

    FitResult r;
    r.names = {"offset", "amplitude", "decay_time"};
    r.params = RVector(3);
    // Amplitude is referred back to t = 0.
    const double a_t0 = p(1) * std::exp(rate * ax.origin / ax.scale);
    r.params << p(0), a_t0, resolved ? ax.scale / rate : kInf;
    r.converged = sol.converged;
    r.iterations = sol.iterations;
    r.reduced_chi2 = sol.reduced_chi2;
    if (!prob.weighted) r.flags.emplace_back("unweighted");
    if (!resolved) r.flags.emplace_back("unidentifiable");
    if (!sol.converged) r.flags.emplace_back("not_converged");
    if (!sol.converged || !resolved) {
        r.sigmas = RVector::Constant(3, kInf);
        return r;
    }
    if (sol.singular) r.flags.emplace_back("singular_covariance");
    RMatrix j = RMatrix::Zero(3, 3);
    j(0, 0) = 1.0;
    j(1, 1) = std::exp(rate * ax.origin / ax.scale);
    j(1, 2) = a_t0 * ax.origin / ax.scale;
    j(2, 2) = -ax.scale / (rate * rate);
    r.covariance = j * sol.covariance * j.transpose();
    r.sigmas = r.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return r;
}

// ---------------------------------------------------------------- extraction

QaExtraction extract_qa(const Measured& f0, const Measured& f1, const Measured& b, double gamma_n) {
    if (f0.sigma < 0.0 || f1.sigma < 0.0 || b.sigma < 0.0) throw ValidationError("extract_qa: negative sigma");
    QaExtraction out;
    out.q_abs.value = std::abs(f0.value - gamma_n * b.value);
    out.q_abs.sigma = std::hypot(f0.sigma, gamma_n * b.sigma);
    out.a_par_abs.value = std::abs(f1.value - f0.value);
    out.a_par_abs.sigma = std::hypot(f1.sigma, f0.sigma);
    out.plausibility_warning = out.a_par_abs.value < 1.0e6 || out.a_par_abs.value > 3.0e6;
    return out;
}

Trend linear_trend(const std::vector<TrendPoint>& points) {
    if (points.size() < 3) throw ValidationError("linear_trend needs at least 3 points");
    std::vector<TrendPoint> pts = points;
    // Order-independent summation.
    std::sort(pts.begin(), pts.end(), [](const TrendPoint& a, const TrendPoint& b) {
        return std::tie(a.pressure_gpa, a.value, a.sigma) < std::tie(b.pressure_gpa, b.value, b.sigma);
    });
    Trend t;
    t.weighted = std::all_of(pts.begin(), pts.end(), [](const TrendPoint& p) { return p.sigma > 0.0; });
    double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : pts) {
        if (!std::isfinite(p.pressure_gpa) || !std::isfinite(p.value) || p.sigma < 0.0)
            throw ValidationError("linear_trend: invalid point");
        const double w = t.weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
        s += w;
        sx += w * p.pressure_gpa;
        sy += w * p.value;
        sxx += w * p.pressure_gpa * p.pressure_gpa;
        sxy += w * p.pressure_gpa * p.value;
    }
    const double det = s * sxx - sx * sx;
    if (!(det > 0.0)) throw ValidationError("linear_trend: pressures must not all coincide");
    t.slope.value = (s * sxy - sx * sy) / det;
    t.intercept.value = (sxx * sy - sx * sxy) / det;
    double chi2 = 0.0;
    for (const auto& p : pts) {
        const double w = t.weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
        const double r = p.value - t.intercept.value - t.slope.value * p.pressure_gpa;
        chi2 += w * r * r;
    }
    t.reduced_chi2 = chi2 / static_cast<double>(pts.size() - 2);
    const double var_scale = t.weighted ? 1.0 : t.reduced_chi2;
    t.slope.sigma = std::sqrt(var_scale * s / det);
    t.intercept.sigma = std::sqrt(var_scale * sxx / det);
    return t;
}

double spectrum_contrast(const FitResult& fit) {
    const double base = fit.value("baseline");
    if (base == 0.0) return 0.0;
    double depth = 0.0;
    for (std::size_t i = 0; i < fit.names.size(); ++i)
        if (fit.names[i].starts_with("amplitude_")) depth = std::max(depth, fit.params(static_cast<Eigen::Index>(i)));
    return depth / base;
}

double spectrum_contrast(const Spectrum& spec) {
    try {
        return spectrum_contrast(fit_lorentzian(spec, 1));
    } catch (const InitializationError&) {
        return 0.0;
    }
}

void write_records_csv(std::ostream& os, const std::vector<ExtractionRecord>& records) {
    os << "pressure_gpa,f_rf0_hz,f_rf0_sigma,f_rf1_hz,f_rf1_sigma,q_abs_hz,q_abs_sigma,a_par_abs_hz,a_par_abs_sigma,"
          "fwhm0_hz,fwhm0_sigma,fwhm1_hz,fwhm1_sigma\n";
    char buf[32];
    auto num = [&](double v) { return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr); };
    for (const auto& r : records) {
        os << num(r.pressure_gpa);
        for (const Measured* m : {&r.f_rf0, &r.f_rf1, &r.q_abs, &r.a_par_abs, &r.fwhm0, &r.fwhm1})
            os << ',' << num(m->value) << ',' << num(m->sigma);
        os << '\n';
    }
}

} // namespace nvdac
