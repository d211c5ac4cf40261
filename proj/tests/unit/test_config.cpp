#include <doctest.h>

#include "nvdac/config.hpp"
#include "nvdac/errors.hpp"

using namespace nvdac;

TEST_SUITE("config") {

TEST_CASE("defaults and overrides") {
    const Config c = parse_config("# run\nnoise.t1e = 300e-6\nfield.magnitude = 500\nrng_seed = 42\n");
    CHECK(c.noise.t1e == 300e-6);
    CHECK(c.field.magnitude() == 500.0);
    CHECK(c.rng_seed == 42);
    CHECK(c.noise.t2n_star == NoiseModel{}.t2n_star);
    const SimulationContext ctx = c.context(16.6);
    CHECK(ctx.params.d_gs == doctest::Approx(3.116e9));
    CHECK_THROWS_AS(c.context(25.0), RangeError);
}

TEST_CASE("render and parse round-trip") {
    Config c;
    c.noise.t2n_star = 65e-6;
    c.optical.pump_rate = 7.5e6;
    c.pressure_model.q_slope = -3.1e3;
    c.field = FieldVector(470.0, 0.01, 0.2);
    c.rng_seed = 123456789012345ULL;
    const std::string text = render_config(c);
    const Config back = parse_config(text);
    CHECK(render_config(back) == text);
    CHECK(back.noise.t2n_star == c.noise.t2n_star);
    CHECK(back.pressure_model.q_slope == c.pressure_model.q_slope);
    CHECK(back.rng_seed == c.rng_seed);
    for (const std::string& key : config_keys()) CHECK(text.find(key + " = ") != std::string::npos);
}

TEST_CASE("unknown and duplicate keys are rejected with their line") {
    try {
        parse_config("noise.t1e = 3e-4\nnoise.t3 = 1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("noise.t3") != std::string::npos);
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_config("rng_seed = 1\nrng_seed = 2\n"), ParseError);
    CHECK_THROWS_AS(parse_config("noise.t1e = fast\n"), ParseError);
    CHECK_THROWS_AS(parse_config("noise.t1e\n"), ParseError);
}

TEST_CASE("invariant violations name the key") {
    CHECK_THROWS_WITH_AS(parse_config("noise.t2e_star = 1\n"), doctest::Contains("noise.t2e_star"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_config("optical.isc_rate_ms1 = 1e6\n"), doctest::Contains("optical.isc_rate_ms1"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(parse_config("field.magnitude = -3\n"), doctest::Contains("field.magnitude"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_config("pressure_model.d_gs0 = -1\n"), doctest::Contains("pressure_model.d_gs0"),
                         ValidationError);
}

TEST_CASE("missing file") {
    CHECK_THROWS_WITH_AS(load_config("/nonexistent/run.cfg"), doctest::Contains("config not found"), ValidationError);
}

} // TEST_SUITE
