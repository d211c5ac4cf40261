#include "nvdac/analysis.hpp"
#include "nvdac/config.hpp"
#include "nvdac/field_inversion.hpp"
#include "nvdac/frame.hpp"
#include "nvdac/presets.hpp"
#include "nvdac/simulation.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace nvdac;

namespace {

const Simulator& ambient() {
    static const Simulator sim(Config{}.context(0.6));
    return sim;
}

void BM_GroundEigensystem(benchmark::State& state) {
    const Hamiltonian h = build_ground_hamiltonian(NVParams{}, FieldVector(460.0, 0.1, 0.2));
    for (auto _ : state) benchmark::DoNotOptimize(eigensystem(h));
}
BENCHMARK(BM_GroundEigensystem);

void BM_FreeEvolution(benchmark::State& state) {
    const Hamiltonian h = build_ground_hamiltonian(NVParams{}, FieldVector(460.0));
    const DensityMatrix rho = DensityMatrix::maximally_mixed_ground();
    const double tau = static_cast<double>(state.range(0)) * 1e-6;
    for (auto _ : state) benchmark::DoNotOptimize(free_evolution(rho, h, NoiseModel{}, tau));
}
BENCHMARK(BM_FreeEvolution)->Arg(1)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_OpticalPump(benchmark::State& state) {
    const DensityMatrix rho = DensityMatrix::maximally_mixed_ground();
    for (auto _ : state)
        benchmark::DoNotOptimize(optical_pump(rho, OpticalModel{}, NVParams{}, FieldVector(460.0), 3e-6));
}
BENCHMARK(BM_OpticalPump)->Unit(benchmark::kMillisecond);

void BM_RfPulsePropagator(benchmark::State& state) {
    const Hamiltonian h = build_ground_hamiltonian(NVParams{}, FieldVector(460.0));
    const RotatingFrame frame(h, Drive{DriveKind::rf, transition_frequency(h, {0, 1}, {0, 0}), 25e3, 0.0});
    for (auto _ : state) benchmark::DoNotOptimize(pulse_propagator(frame, NoiseModel{}, 20e-6));
}
BENCHMARK(BM_RfPulsePropagator)->Unit(benchmark::kMicrosecond);

void BM_PulsedNmrPoint(benchmark::State& state) {
    const PulseSequence seq = preset("nmr_pulsed_ms0", ambient());
    const double f = resonances(ambient()).nmr_ms0;
    for (auto _ : state) benchmark::DoNotOptimize(ambient().run_point(seq, {{seq.sweep->variable, f}}));
}
BENCHMARK(BM_PulsedNmrPoint)->Unit(benchmark::kMillisecond);

void BM_CwNmrPoint(benchmark::State& state) {
    const PulseSequence seq = preset("nmr_cw", ambient());
    const double f = resonances(ambient()).nmr_ms0;
    for (auto _ : state) benchmark::DoNotOptimize(ambient().run_point(seq, {{seq.sweep->variable, f}}));
}
BENCHMARK(BM_CwNmrPoint)->Unit(benchmark::kMillisecond);

void BM_LorentzianFit(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 0.003);
    Spectrum s;
    for (int i = 0; i < 151; ++i) {
        const double x = 4.9e6 + 2e3 * i, h = 15e3;
        s.x.push_back(x);
        s.y.push_back(1.0 - 0.1 * h * h / ((x - 5.05e6) * (x - 5.05e6) + h * h) + n(rng));
        s.sigma.push_back(0.003);
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_lorentzian(s, 1));
}
BENCHMARK(BM_LorentzianFit)->Unit(benchmark::kMicrosecond);

void BM_FieldInversion(benchmark::State& state) {
    const NVParams p;
    const std::vector<double> centers = odmr_lines(p, FieldVector(420.0, 0.6, 1.0));
    for (auto _ : state) benchmark::DoNotOptimize(fit_field_from_odmr(centers, p.d_gs, p));
}
BENCHMARK(BM_FieldInversion)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
