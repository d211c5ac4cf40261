#include "nvdac/simulation.hpp"

#include "nvdac/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <random>
#include <thread>

namespace nvdac {

SimulationContext SimulationContext::at_pressure(const PressureModel& model, double pressure_gpa,
                                                 const FieldVector& field) {
    SimulationContext ctx;
    ctx.params = params_at(model, pressure_gpa);
    ctx.field = field;
    ctx.pressure_gpa = pressure_gpa;
    return ctx;
}

void SimulationContext::validate() const {
    params.validate(false);
    optical.validate();
    noise.validate();
}

struct Simulator::Cache {
    std::mutex mutex;
    std::unique_ptr<OpticalCycle> cycle;
    std::map<double, std::shared_ptr<const CMatrix>> lasers;
    std::map<std::string, std::shared_ptr<const CMatrix>> drives;
    std::array<std::optional<double>, 4> cw_baseline;  // undriven CW counts per NV axis, unit window
};

Simulator::Simulator(SimulationContext ctx)
    : ctx_(std::move(ctx)), ground_(build_ground_hamiltonian(ctx_.params, ctx_.field)),
      cache_(std::make_shared<Cache>()) {
    ctx_.validate();
}

DensityMatrix Simulator::laser(const DensityMatrix& rho, double duration) const {
    std::shared_ptr<const CMatrix> prop;
    {
        std::lock_guard lock(cache_->mutex);
        if (!cache_->cycle)
            cache_->cycle = std::make_unique<OpticalCycle>(ctx_.optical, ctx_.params, ctx_.field, ctx_.noise);
        auto& slot = cache_->lasers[duration];
        if (!slot) slot = std::make_shared<const CMatrix>(cache_->cycle->propagator(duration));
        prop = slot;
    }
    return relax_to_ground(cache_->cycle->apply(*prop, rho), ctx_.optical);
}

std::shared_ptr<const CMatrix> Simulator::drive_propagator(const RotatingFrame& frame, double duration,
                                                           bool cacheable) const {
    if (!cacheable) return std::make_shared<const CMatrix>(pulse_propagator(frame, ctx_.noise, duration));
    const Drive& d = frame.drive();
    std::string key;
    for (double v : {static_cast<double>(d.kind), d.frequency, d.rabi, d.phase, duration}) {
        char buf[32];
        key.append(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
        key += '|';
    }
    {
        std::lock_guard lock(cache_->mutex);
        const auto it = cache_->drives.find(key);
        if (it != cache_->drives.end()) return it->second;
    }
    // Computed outside the lock; a concurrent duplicate produces the same matrix.
    auto prop = std::make_shared<const CMatrix>(pulse_propagator(frame, ctx_.noise, duration));
    std::lock_guard lock(cache_->mutex);
    return cache_->drives.emplace(key, prop).first->second;
}

DensityMatrix Simulator::polarized_state(double laser_duration) const {
    return laser(DensityMatrix::maximally_mixed_ground(), laser_duration);
}

namespace {

Drive to_drive(const Pulse& p, const std::map<std::string, double>& b) {
    return Drive{p.kind == PulseKind::mw ? DriveKind::mw : DriveKind::rf, p.frequency.resolve(b), p.rabi, p.phase};
}

} // namespace

PointResult Simulator::run_pulsed(const PulseSequence& seq, const std::map<std::string, double>& b) const {
    DensityMatrix rho = DensityMatrix::maximally_mixed_ground();
    double t = 0.0;
    double counts = 0.0;
    double norm = 0.0;
    PointResult out;
    for (const Pulse& p : seq.pulses) {
        const double d = p.resolved_duration(b);
        switch (p.kind) {
        case PulseKind::read: {
            const ReadoutResult r = readout(rho, ctx_.optical, d, seq.shots_per_point, false);
            counts += r.mean;
            norm += ctx_.optical.counts_rate_bright * d * seq.shots_per_point;
            rho = laser(rho, d);
            break;
        }
        case PulseKind::laser: rho = laser(rho, d); break;
        case PulseKind::wait: rho = free_evolution(rho, ground_, ctx_.noise, d); break;
        case PulseKind::mw:
        case PulseKind::rf: {
            const RotatingFrame frame(ground_, to_drive(p, b));
            const bool cacheable = !p.frequency.is_symbol() && !p.duration.is_symbol();
            rho = apply_pulse_propagator(rho, frame, *drive_propagator(frame, d, cacheable), t, d).rho;
            out.rwa_ratio = std::max(out.rwa_ratio, frame.rwa_ratio());
            out.rwa_warning |= frame.rwa_warning();
            break;
        }
        }
        t += d;
    }
    out.signal = counts / norm;
    out.sigma = ctx_.noise.shot_noise ? std::sqrt(counts) / norm : 0.0;
    return out;
}

double Simulator::cw_rate(const FieldVector& b_nv, const Drive& drive) const {
    const DensityMatrix ss = cw_steady_state(ctx_.optical, ctx_.params, b_nv, ctx_.noise, drive);
    return readout(relax_to_ground(ss, ctx_.optical), ctx_.optical, 1.0, 1.0, false).mean;
}

PointResult Simulator::run_cw(const PulseSequence& seq, const std::map<std::string, double>& b) const {
    constexpr double kDefaultWindow = 1.0e-3;
    // Orientations detuned by more than this many linewidths read their undriven rate.
    constexpr double kCutoffWidths = 15.0;
    Drive drive{DriveKind::rf, 0.0, 0.0, 0.0};
    double window = 0.0;
    for (const Pulse& p : seq.pulses) {
        if (p.is_drive()) drive = to_drive(p, b);
        if (p.kind == PulseKind::read) window += p.has_duration ? p.resolved_duration(b) : kDefaultWindow;
    }
    const RotatingFrame frame(ground_, drive);
    double rate = 0.0;
    if (drive.kind == DriveKind::mw && ctx_.orientation_average) {
        const double width = 1.0 / (kPi * ctx_.noise.t2e_star) + 2.0 * drive.rabi;
        const double cutoff = kCutoffWidths * width + 2.0 * (std::abs(ctx_.params.a_par) + std::abs(ctx_.params.a_perp));
        for (int k = 0; k < 4; ++k) {
            const FieldVector b_nv = field_in_axis_frame(ctx_.field, k);
            const auto lines = electron_lines(ctx_.params, b_nv);
            const bool near = std::abs(drive.frequency - lines[0]) < cutoff ||
                              std::abs(drive.frequency - lines[1]) < cutoff;
            if (near) {
                rate += 0.25 * cw_rate(b_nv, drive);
                continue;
            }
            std::optional<double> cached;
            {
                std::lock_guard lock(cache_->mutex);
                cached = cache_->cw_baseline[static_cast<std::size_t>(k)];
            }
            if (!cached) {
                cached = cw_rate(b_nv, Drive{DriveKind::mw, drive.frequency, 0.0, 0.0});
                std::lock_guard lock(cache_->mutex);
                cache_->cw_baseline[static_cast<std::size_t>(k)] = cached;
            }
            rate += 0.25 * *cached;
        }
    } else {
        rate = cw_rate(ctx_.field, drive);
    }
    const double counts = rate * window * seq.shots_per_point;
    const double norm = ctx_.optical.counts_rate_bright * window * seq.shots_per_point;
    PointResult out;
    out.signal = counts / norm;
    out.sigma = ctx_.noise.shot_noise ? std::sqrt(counts) / norm : 0.0;
    out.rwa_ratio = frame.rwa_ratio();
    out.rwa_warning = frame.rwa_warning();
    return out;
}

PointResult Simulator::run_point(const PulseSequence& seq, const std::map<std::string, double>& bindings) const {
    seq.validate();
    return seq.cw ? run_cw(seq, bindings) : run_pulsed(seq, bindings);
}

int default_thread_count() {
    if (const char* env = std::getenv("NVDAC_THREADS")) {
        int n = 0;
        const auto [ptr, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), n);
        if (ec == std::errc() && n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

Spectrum Simulator::expected_sweep(const PulseSequence& seq, const std::string& mode, int threads) const {
    seq.validate();
    if (!seq.sweep) throw ValidationError("sequence has no sweep declaration");
    const std::vector<double> grid = seq.sweep->grid();
    Spectrum s;
    s.x = grid;
    s.y.assign(grid.size(), 0.0);
    s.sigma.assign(grid.size(), 0.0);
    s.mode = mode.empty() ? (seq.cw ? "cw" : "pulsed") : mode;
    s.pressure_gpa = ctx_.pressure_gpa;
    s.field_gauss = ctx_.field.magnitude();

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                const PointResult r = run_point(seq, {{seq.sweep->variable, grid[i]}});
                s.y[i] = r.signal;
                s.sigma[i] = r.sigma;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const int n = std::clamp(threads > 0 ? threads : default_thread_count(), 1, static_cast<int>(grid.size()));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return s;
}

Spectrum Simulator::run_sweep(const PulseSequence& seq, const std::string& mode, int threads) const {
    Spectrum s = expected_sweep(seq, mode, threads);
    return ctx_.noise.shot_noise ? add_shot_noise(s, ctx_.seed) : s;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Box-Muller on raw mt19937_64 output; std::normal_distribution is not
// specified bit-for-bit across standard libraries.
double standard_normal(std::mt19937_64& gen) {
    const double u1 = (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(~stream));
}

Spectrum add_shot_noise(const Spectrum& expected, std::uint64_t seed) {
    Spectrum s = expected;
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::mt19937_64 gen(splitmix64(seed ^ splitmix64(i)));
        s.y[i] += s.sigma[i] * standard_normal(gen);
    }
    return s;
}

} // namespace nvdac
