#include <doctest.h>

#include "nvdac/errors.hpp"
#include "nvdac/linalg.hpp"
#include "nvdac/sequence.hpp"

#include <random>

using namespace nvdac;

namespace {

PulseSequence random_sequence(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> kind(0, 4);
    PulseSequence s;
    const bool swept = u(rng) < 0.7;
    if (swept) s.sweep = Sweep{"x", 1e-6, 1e-6 + 1e-4 * (0.1 + u(rng)), 2 + static_cast<int>(50 * u(rng))};
    const int n = 1 + static_cast<int>(6 * u(rng));
    for (int i = 0; i < n; ++i) {
        Pulse p;
        p.kind = static_cast<PulseKind>(kind(rng));
        p.duration = Value::literal(1e-7 * (1.0 + 100.0 * u(rng)));
        if (p.is_drive()) {
            p.rabi = 1e3 + 1e7 * u(rng);
            p.frequency = swept && u(rng) < 0.5 ? Value::ref("x") : Value::literal(1e6 + 3e9 * u(rng));
            p.phase = u(rng) < 0.5 ? 0.0 : kPi * u(rng);
            const double a = u(rng);
            if (a < 0.25) p.area = AreaSymbol::pi;
            else if (a < 0.5) p.area = AreaSymbol::half_pi;
            else if (swept && a < 0.75 && !p.frequency.is_symbol()) p.duration = Value::ref("x");
            if (p.area != AreaSymbol::none) p.duration = Value::literal(0.0);
        }
        s.pulses.push_back(p);
    }
    Pulse read;
    read.kind = PulseKind::read;
    read.duration = Value::literal(3e-7);
    s.pulses.push_back(read);
    s.shots_per_point = std::round(1e3 + 1e6 * u(rng));
    return s;
}

} // namespace

TEST_SUITE("sequences") {

TEST_CASE("pulsed NMR text parses into three pulses and a sweep") {
    const PulseSequence s = parse_sequence("laser 3e-6\nrf $f 25e3 pi\nlaser_read 3e-7\nsweep f 4.8e6 5.1e6 151");
    REQUIRE(s.pulses.size() == 3);
    CHECK(s.pulses[0].kind == PulseKind::laser);
    CHECK(s.pulses[1].kind == PulseKind::rf);
    CHECK(s.pulses[1].frequency.symbol == "f");
    CHECK(s.pulses[1].area == AreaSymbol::pi);
    CHECK(s.pulses[2].kind == PulseKind::read);
    REQUIRE(s.sweep);
    CHECK(s.sweep->points == 151);
    CHECK(s.sweep->grid().front() == 4.8e6);
    CHECK(s.sweep->grid().back() == 5.1e6);
    CHECK_FALSE(s.cw);
}

TEST_CASE("cw block") {
    const PulseSequence s = parse_sequence("cw { laser; rf $f 10e3; read 1e-3 }\nsweep f 4.9e6 5.2e6 151\n");
    CHECK(s.cw);
    REQUIRE(s.pulses.size() == 3);
    CHECK_FALSE(s.pulses[0].has_duration);
    CHECK(s.pulses[2].kind == PulseKind::read);
}

TEST_CASE("pi areas resolve from the Rabi frequency exactly") {
    const PulseSequence s = parse_sequence("laser 1e-6\nmw 2.87e9 62e6 pi\nrf 5e6 25e3 pi/2\nlaser_read 3e-7");
    CHECK(s.pulses[1].resolved_duration({}) == 1.0 / (2.0 * 62e6));
    CHECK(s.pulses[2].resolved_duration({}) == 1.0 / (4.0 * 25e3));
}

TEST_CASE("render and parse round-trip") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        const PulseSequence s = random_sequence(rng);
        REQUIRE_NOTHROW(s.validate());
        const PulseSequence back = parse_sequence(render(s));
        CHECK(back == s);
        CHECK(render(back) == render(s));
    }
}

TEST_CASE("errors carry line and column") {
    auto location = [](std::string_view text) -> std::pair<std::size_t, std::size_t> {
        try {
            parse_sequence(text);
        } catch (const ParseError& e) {
            return {e.line(), e.column()};
        }
        return {0, 0};
    };
    CHECK(location("laser 1e-6\n  zap 3\nlaser_read 3e-7") == std::pair<std::size_t, std::size_t>{2, 3});
    CHECK(location("laser 1e-6\nrf $g 25e3 pi\nlaser_read 3e-7\nsweep f 1 2 3").first == 2);
    CHECK(location("laser 1e-6\nrf $f 25e3 pi\nlaser_read 3e-7\nsweep f 1 2 3\nsweep f 1 2 3").first == 5);
    CHECK(location("laser abc\nlaser_read 3e-7").first == 1);
    CHECK_THROWS_WITH_AS(parse_sequence("zap 1"), doctest::Contains("unknown keyword"), ParseError);
    CHECK_THROWS_WITH_AS(parse_sequence("laser 1e-6\nrf $g 1e3 pi\nread 1e-6\nsweep f 1 2 3"),
                         doctest::Contains("unresolved"), ParseError);
    CHECK_THROWS_WITH_AS(parse_sequence("laser 1\nread 1\nsweep f 1 2 3\nsweep g 1 2 3"),
                         doctest::Contains("duplicate sweep"), ParseError);
}

TEST_CASE("structural validation") {
    CHECK_THROWS_WITH_AS(parse_sequence("laser 1e-6\nrf 5e6 1e3 pi\n"), doctest::Contains("no read pulse"), ParseError);
    PulseSequence s = parse_sequence("laser 1e-6\nread 3e-7");
    s.pulses[0].duration = Value::literal(-1.0);
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("phase alternation flips the last drive only") {
    const PulseSequence s = parse_sequence("laser 1e-6\nrf 5e6 1e3 pi/2\nwait $t\nrf 5e6 1e3 pi/2\nread 3e-7\nsweep t 0 1e-4 11");
    const PulseSequence a = phase_alternated(s);
    CHECK(a.pulses[1].phase == s.pulses[1].phase);
    CHECK(a.pulses[3].phase == doctest::Approx(kPi));
    CHECK(phase_alternated(a).pulses[3].phase == doctest::Approx(0.0));
    CHECK_THROWS_AS(phase_alternated(parse_sequence("laser 1e-6\nread 3e-7")), ValidationError);
}

} // TEST_SUITE
