#include <doctest.h>

#include "nvdac/errors.hpp"
#include "nvdac/field_inversion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace nvdac;

namespace {

FieldVector random_field(std::mt19937_64& rng, double bmin, double bmax) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return FieldVector(bmin + (bmax - bmin) * u(rng), std::acos(1.0 - 2.0 * u(rng)), kTwoPi * u(rng));
}

std::vector<double> sorted_lines(const NVParams& p, const FieldVector& b) {
    std::vector<double> v = odmr_lines(p, b);
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

TEST_SUITE("field_inversion") {

TEST_CASE("symmetry group") {
    const FieldVector b(400.0, 0.7, 1.3);
    const std::vector<FieldVector> images = symmetry_images(b);
    REQUIRE(images.size() == 48);
    CHECK((images[0].cartesian() - b.cartesian()).norm() < 1e-9);
    const NVParams p;
    const std::vector<double> ref = sorted_lines(p, b);
    for (const FieldVector& g : images) {
        CHECK(g.magnitude() == doctest::Approx(400.0));
        const std::vector<double> l = sorted_lines(p, g);
        for (std::size_t k = 0; k < l.size(); ++k) CHECK(std::abs(l[k] - ref[k]) < 1.0);
    }
    const FieldVector c = canonical_field(b);
    CHECK((canonical_field(c).cartesian() - c.cartesian()).norm() < 1e-9);
    for (const FieldVector& g : images) CHECK((canonical_field(g).cartesian() - c.cartesian()).norm() < 1e-6);
    CHECK(symmetric_angle(b, images[17]) < 1e-9);
}

TEST_CASE("aligned field") {
    const NVParams p;
    const FieldFit f = fit_field_from_odmr(odmr_lines(p, FieldVector(460.0)), p.d_gs, p);
    CHECK(f.field.magnitude() == doctest::Approx(460.0).epsilon(1e-6));
    CHECK(f.field.theta() < 1e-3);
    CHECK(f.orientation_defined);
    CHECK(f.axis == 0);
}

TEST_CASE("closed loop over random fields") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> jitter(0.0, 50e3);
    NVParams p;
    p.d_gs = 2.95e9;
    for (int trial = 0; trial < 12; ++trial) {
        const FieldVector b = random_field(rng, 100.0, 700.0);
        std::vector<double> centers = odmr_lines(p, b);
        if (trial % 2) for (double& c : centers) c += jitter(rng);
        const FieldFit f = fit_field_from_odmr(centers, p.d_gs, p);
        CHECK(std::abs(f.field.magnitude() - b.magnitude()) < 1.0);
        CHECK(symmetric_angle(f.field, b) < 0.5 * kPi / 180.0);
        CHECK(f.sigma_magnitude >= 0.0);
    }
}

TEST_CASE("degenerate and inconsistent inputs") {
    const NVParams p;
    const FieldFit zero = fit_field_from_odmr({p.d_gs, p.d_gs + 1e5}, p.d_gs, p);
    CHECK(zero.field.magnitude() == 0.0);
    CHECK_FALSE(zero.orientation_defined);
    CHECK_THROWS_WITH_AS(fit_field_from_odmr({2.5e9, 3.2e9}, p.d_gs, p), doctest::Contains("underdetermined"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(fit_field_from_odmr({1.0e9, 1.1e9, 4.0e9, 5.2e9, 2.0e9}, p.d_gs, p),
                         doctest::Contains("model mismatch"), ValidationError);
}

} // TEST_SUITE
