#include <doctest.h>

#include "nvdac/analysis.hpp"
#include "nvdac/config.hpp"
#include "nvdac/errors.hpp"
#include "nvdac/pipeline.hpp"
#include "nvdac/presets.hpp"
#include "nvdac/simulation.hpp"

#include <sstream>

using namespace nvdac;

namespace {

std::string csv(const Spectrum& s) {
    std::ostringstream os;
    write_csv(os, s);
    return os.str();
}

const Simulator& ambient() {
    static const Simulator sim(Config{}.context(0.6));
    return sim;
}

} // namespace

TEST_SUITE("simulation") {

TEST_CASE("sweeps are identical for any thread count") {
    const Simulator& sim = ambient();
    const PulseSequence seq = preset("nmr_pulsed_ms0", sim, {{"points", 41}});
    const std::string one = csv(sim.run_sweep(seq, "nmr_pulsed_ms0", 1));
    CHECK(csv(sim.run_sweep(seq, "nmr_pulsed_ms0", 3)) == one);
    CHECK(csv(sim.run_sweep(seq, "nmr_pulsed_ms0", 8)) == one);
}

TEST_CASE("shot noise depends only on seed and point index") {
    Spectrum s;
    for (int i = 0; i < 50; ++i) {
        s.x.push_back(i);
        s.y.push_back(1.0);
        s.sigma.push_back(0.01);
    }
    const Spectrum full = add_shot_noise(s, 77);
    Spectrum head = s;
    head.x.resize(20);
    head.y.resize(20);
    head.sigma.resize(20);
    const Spectrum part = add_shot_noise(head, 77);
    for (int i = 0; i < 20; ++i) CHECK(part.y[i] == full.y[i]);
    CHECK(add_shot_noise(s, 78).y != full.y);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("unknown preset and override keys") {
    CHECK_THROWS_AS(preset("nmr_magic", ambient()), ValidationError);
    CHECK_THROWS_AS(preset("rabi_n", ambient(), {{"colour", 1.0}}), ValidationError);
}

TEST_CASE("ODMR preset shows four dips at an aligned field") {
    const Spectrum s = ambient().expected_sweep(preset("odmr_cw", ambient()), "odmr_cw");
    const FitResult r = fit_lorentzian(s, 4);
    CHECK(r.converged);
}

TEST_CASE("electron Rabi preset oscillates at the drive Rabi frequency") {
    const Spectrum s = ambient().expected_sweep(preset("rabi_e", ambient(), {{"mw_rabi", 62e6}}), "rabi_e");
    const FitResult r = fit_damped_cosine(s);
    REQUIRE(r.converged);
    CHECK(r.value("frequency") == doctest::Approx(62e6).epsilon(0.005));
}

TEST_CASE("NMR presets show one dip at the resonance") {
    const Resonances res = resonances(ambient());
    for (const char* name : {"nmr_cw", "nmr_pulsed_ms0", "nmr_pulsed_ms1"}) {
        CAPTURE(name);
        const Spectrum s = ambient().expected_sweep(preset(name, ambient()), name);
        const FitResult r = fit_lorentzian(s, 1);
        REQUIRE(r.converged);
        const double target = std::string(name) == "nmr_pulsed_ms1" ? res.nmr_ms1 : res.nmr_ms0;
        CHECK(std::abs(r.value("center_0") - target) < 2e3);
        CHECK(spectrum_contrast(r) > 0.02);
    }
}

TEST_CASE("nuclear Rabi and FID presets oscillate") {
    const FitResult rabi = fit_damped_cosine(expected_rabi_n_difference(ambient(), 35e3));
    REQUIRE(rabi.converged);
    CHECK(rabi.value("frequency") == doctest::Approx(35e3).epsilon(0.03));
    const FitResult fid = fit_damped_cosine(expected_fid_difference(ambient()));
    REQUIRE(fid.converged);
    CHECK(fid.value("decay_time") == doctest::Approx(70e-6).epsilon(0.15));
}

TEST_CASE("electron T1 preset recovers monotonically") {
    const Spectrum s = ambient().expected_sweep(preset("t1_e", ambient()), "t1_e");
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.y[i] >= s.y[i - 1]);
    const FitResult r = fit_exponential(s);
    REQUIRE(r.converged);
    CHECK(r.value("decay_time") == doctest::Approx(254e-6).epsilon(0.05));
}

TEST_CASE("pressure series needs three pressures inside the range") {
    CHECK_THROWS_AS(run_pressure_series(Config{}, {0.6, 16.6}), ValidationError);
    CHECK_THROWS_AS(run_pressure_series(Config{}, {0.6, 10.0, 25.0}), RangeError);
}

} // TEST_SUITE
