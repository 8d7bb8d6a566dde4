#include "downwash/dynamic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "downwash/error.hpp"

namespace downwash {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEdgeTolerance = 1e-9;  // rad

// Cycle count and fraction of the current cycle at time t.
struct CyclePos {
    int cycle;
    double frac;
};

CyclePos cycle_position(double cycles) {
    const double c = std::floor(cycles + 1e-9);
    return {static_cast<int>(c), std::max(0.0, cycles - c)};
}

struct Envelope {
    double a;
    double da;  // per second
};

Envelope amplitude_at(const DynamicProfile& p, double cycles) {
    const double A = p.amplitude_m;
    const double up = p.ramp_up_cycles;
    const double hold = up + p.stable_cycles;
    const double end = hold + p.ramp_down_cycles;
    if (cycles < 0.0) return {0.0, 0.0};
    if (cycles < up) return {A * cycles / up, A * p.frequency_hz / up};
    if (cycles <= hold) return {A, 0.0};
    if (cycles < end) return {A * (end - cycles) / p.ramp_down_cycles, -A * p.frequency_hz / p.ramp_down_cycles};
    return {0.0, 0.0};
}

double target_of(const LoadGrid& grid, Vehicle v, double dx, double dz_l, bool& clamped,
                 double& pitch) {
    const bool below = dz_l < grid.dz.front();
    const LoadSample s = query_loads(grid, v, dx, below ? grid.dz.front() : dz_l,
                                     OutOfRange::asymptotic);
    clamped = below;
    pitch = s.pitch_ratio;
    return s.thrust_ratio;
}

// First-order relaxation y' = (T - y) / tau over one step with T linear in time.
double relax(double y0, double t0, double t1, double h, double tau) {
    if (!(tau > 0.0)) return t1;
    const double slope = (t1 - t0) / h;
    const double e = std::exp(-h / tau);
    return t1 - slope * tau + (y0 - t0 + slope * tau) * e;
}

}  // namespace

std::string_view to_string(Configuration c) noexcept {
    return c == Configuration::stacked ? "stacked" : "offset";
}

Configuration parse_configuration(std::string_view text) {
    if (text == "stacked") return Configuration::stacked;
    if (text == "offset") return Configuration::offset;
    fail(ErrorKind::config, "unknown configuration '" + std::string(text) + "' (expected stacked|offset)");
}

double configuration_offset(Configuration c) noexcept { return c == Configuration::stacked ? 0.0 : 2.0; }

double DynamicProfile::omega() const noexcept { return kTwoPi * frequency_hz; }

void DynamicProfile::validate() const {
    require(dz_min_m > 0.0 && std::isfinite(dz_min_m), ErrorKind::domain, "dz_min must be positive");
    require(amplitude_m >= 0.0 && std::isfinite(amplitude_m), ErrorKind::domain,
            "amplitude must be non-negative");
    require(frequency_hz > 0.0 && std::isfinite(frequency_hz), ErrorKind::domain,
            "frequency must be positive");
    require(sample_rate_hz > 0.0 && std::isfinite(sample_rate_hz), ErrorKind::domain,
            "sample rate must be positive");
    require(ramp_up_cycles >= 0 && ramp_down_cycles >= 0, ErrorKind::domain,
            "ramp cycle counts must be non-negative");
    require(stable_cycles >= 1, ErrorKind::domain, "at least one stable cycle is required");
    if (extended) return;
    if (dz_min_m < 0.005 || dz_min_m > 0.07) {
        fail(ErrorKind::validity, "dz_min " + std::to_string(dz_min_m) +
                                      " m outside [0.005, 0.07] m (use --extended)");
    }
    if (amplitude_m < 0.025 || amplitude_m > 0.09) {
        fail(ErrorKind::validity, "amplitude " + std::to_string(amplitude_m) +
                                      " m outside [0.025, 0.09] m (use --extended)");
    }
    if (frequency_hz < 0.1 || frequency_hz > 1.0) {
        fail(ErrorKind::validity, "frequency " + std::to_string(frequency_hz) +
                                      " Hz outside [0.1, 1] Hz (use --extended)");
    }
}

double phase_at(const DynamicProfile& p, double t) {
    return kTwoPi * cycle_position(p.frequency_hz * t).frac;
}

Separation separation_trajectory(const DynamicProfile& p, double t) {
    const double cycles = p.frequency_hz * t;
    const double th = kTwoPi * cycle_position(cycles).frac;
    const Envelope env = amplitude_at(p, cycles);
    const double s = std::sin(th);
    return {p.dz_min_m + env.a * (1.0 + s), env.da * (1.0 + s) + env.a * p.omega() * std::cos(th)};
}

double peak_rate(const DynamicProfile& p) { return p.amplitude_m * p.omega(); }

LagModel wake_convection_lag(const VehicleGeometry& geom, const Environment& env) {
    const double ui = induced_velocity(geom, env, geom.weight_n);
    return LagModel{[ui](double dz) { return std::max(dz, 0.0) / ui; }, 1.0};
}

LagModel zero_lag() { return LagModel{}; }

LoadTimeSeries simulate_loads(const LoadGrid& grid, const DynamicProfile& profile,
                              const VehicleGeometry& geom, const LagModel& lag,
                              const SimOptions& opts) {
    profile.validate();
    geom.validate();
    grid.validate();
    require(opts.substeps >= 1, ErrorKind::argument, "substeps must be >= 1");
    const double min_rate = 50.0 * profile.frequency_hz;
    if (profile.sample_rate_hz < min_rate) {
        fail(ErrorKind::aliasing, "sample rate " + std::to_string(profile.sample_rate_hz) +
                                      " Hz is below 50 f; use at least " + std::to_string(min_rate) +
                                      " Hz");
    }
    require(grid.ndx() >= 2 && grid.ndz() >= 2, ErrorKind::state,
            "load grid needs at least two nodes per axis");

    const double dx = configuration_offset(profile.configuration);
    const double l = geom.arm_length_m;
    const long n = std::lround(profile.duration_s() * profile.sample_rate_hz);
    const double fs = profile.sample_rate_hz;
    const double f = profile.frequency_hz;
    const double h = 1.0 / (fs * opts.substeps);

    LoadTimeSeries out;
    out.t.reserve(static_cast<std::size_t>(n));

    bool clamped = false;
    double p0 = 0.0;
    double t0 = target_of(grid, opts.vehicle, dx, separation_trajectory(profile, 0.0).dz / l, clamped, p0);
    double yt = t0;
    double yp = p0;
    for (long i = 0; i < n; ++i) {
        if (i > 0) {
            // Integrate from sample i-1 to sample i in equal substeps.
            for (int k = 1; k <= opts.substeps; ++k) {
                const double tk = (static_cast<double>(i - 1) + static_cast<double>(k) / opts.substeps) / fs;
                const double tm = tk - 0.5 * h;
                bool c = false;
                double p1 = 0.0;
                const double t1 = target_of(grid, opts.vehicle, dx, separation_trajectory(profile, tk).dz / l, c, p1);
                const double tau = lag.tau ? lag.tau(separation_trajectory(profile, tm).dz) : 0.0;
                yt = relax(yt, t0, t1, h, tau);
                yp = relax(yp, p0, p1, h, tau);
                t0 = t1;
                p0 = p1;
                clamped = c;
            }
        }
        const double t = static_cast<double>(i) / fs;
        const Separation sep = separation_trajectory(profile, t);
        const CyclePos cp = cycle_position(static_cast<double>(i) * f / fs);
        out.t.push_back(t);
        out.dz.push_back(sep.dz);
        out.dz_dot.push_back(sep.dz_dot);
        out.thrust_ratio.push_back(t0 + lag.gain * (t0 - yt));
        out.pitch_ratio.push_back(p0 + lag.gain * (p0 - yp));
        out.phase.push_back(kTwoPi * cp.frac);
        out.cycle.push_back(cp.cycle);
        out.clamped.push_back(clamped ? 1 : 0);
    }
    return out;
}

LoadTimeSeries stable_portion(const LoadTimeSeries& s, const DynamicProfile& profile) {
    LoadTimeSeries out;
    const int lo = profile.ramp_up_cycles;
    const int hi = lo + profile.stable_cycles;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.cycle[i] < lo || s.cycle[i] >= hi) continue;
        out.t.push_back(s.t[i]);
        out.dz.push_back(s.dz[i]);
        out.dz_dot.push_back(s.dz_dot[i]);
        out.thrust_ratio.push_back(s.thrust_ratio[i]);
        out.pitch_ratio.push_back(s.pitch_ratio[i]);
        out.phase.push_back(s.phase[i]);
        out.cycle.push_back(s.cycle[i]);
        out.clamped.push_back(s.clamped[i]);
    }
    return out;
}

HysteresisLoop phase_average(const LoadTimeSeries& s, int bins) {
    require(bins >= 8, ErrorKind::argument, "phase averaging needs at least 8 bins");
    const std::size_t nb = static_cast<std::size_t>(bins);
    const double width = kTwoPi / bins;

    struct Acc {
        bool seeded = false;
        double w = 0.0;
        double shift[4] = {0, 0, 0, 0};
        double sum[4] = {0, 0, 0, 0};
        double sq[4] = {0, 0, 0, 0};
    };
    std::vector<Acc> acc(nb);
    const auto add = [&](std::size_t b, double w, const double (&x)[4]) {
        Acc& a = acc[b];
        if (!a.seeded) {
            for (int c = 0; c < 4; ++c) a.shift[c] = x[c];
            a.seeded = true;
        }
        a.w += w;
        for (int c = 0; c < 4; ++c) {
            const double d = x[c] - a.shift[c];
            a.sum[c] += w * d;
            a.sq[c] += w * d * d;
        }
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double x[4] = {s.dz[i], s.dz_dot[i], s.thrust_ratio[i], s.pitch_ratio[i]};
        const double pos = s.phase[i] / width;
        const double edge = std::round(pos);
        if (std::fabs(pos - edge) * width < kEdgeTolerance) {
            const long e = static_cast<long>(edge);
            add(static_cast<std::size_t>((e - 1 + bins) % bins), 0.5, x);
            add(static_cast<std::size_t>(e % bins), 0.5, x);
        } else {
            add(static_cast<std::size_t>(static_cast<long>(std::floor(pos)) % bins), 1.0, x);
        }
    }

    HysteresisLoop loop;
    for (std::size_t b = 0; b < nb; ++b) {
        const Acc& a = acc[b];
        if (!(a.w > 0.0)) {
            fail(ErrorKind::binning, "phase bin " + std::to_string(b) + " of " + std::to_string(bins) +
                                         " is empty; use fewer bins or a higher sample rate");
        }
        double mean[4];
        double sd[4];
        for (int c = 0; c < 4; ++c) {
            const double m = a.sum[c] / a.w;
            mean[c] = a.shift[c] + m;
            sd[c] = std::sqrt(std::max(0.0, a.sq[c] / a.w - m * m));
        }
        loop.phase_bin_centers.push_back((static_cast<double>(b) + 0.5) * width);
        loop.dz_mean.push_back(mean[0]);
        loop.dz_dot_mean.push_back(mean[1]);
        loop.thrust_mean.push_back(mean[2]);
        loop.pitch_mean.push_back(mean[3]);
        loop.thrust_std.push_back(sd[2]);
        loop.pitch_std.push_back(sd[3]);
        loop.weight.push_back(a.w);
    }
    const LoopMetrics m = loop_metrics(loop);
    loop.loop_area = m.loop_area;
    loop.asymmetry = m.asymmetry;
    return loop;
}

double loop_area(const std::vector<double>& dz, const std::vector<double>& thrust) {
    require(dz.size() == thrust.size(), ErrorKind::shape, "loop arrays have unequal lengths");
    double area = 0.0;
    const std::size_t n = dz.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        area += 0.5 * (thrust[i] + thrust[j]) * (dz[j] - dz[i]);
    }
    return area;
}

LoopMetrics loop_metrics(const HysteresisLoop& loop) {
    LoopMetrics m;
    if (loop.bins() == 0) return m;
    m.loop_area = loop_area(loop.dz_mean, loop.thrust_mean);
    double ret = 0.0, app = 0.0;
    int nr = 0, na = 0;
    for (std::size_t b = 0; b < loop.bins(); ++b) {
        const double c = std::cos(loop.phase_bin_centers[b]);
        if (c > 1e-12) {
            ret += loop.thrust_mean[b];
            ++nr;
        } else if (c < -1e-12) {
            app += loop.thrust_mean[b];
            ++na;
        }
    }
    if (nr > 0 && na > 0) m.asymmetry = ret / nr - app / na;
    const auto [tmin, tmax] = std::minmax_element(loop.thrust_mean.begin(), loop.thrust_mean.end());
    const auto [pmin, pmax] = std::minmax_element(loop.pitch_mean.begin(), loop.pitch_mean.end());
    m.thrust_min = *tmin;
    m.thrust_max = *tmax;
    m.pitch_min = *pmin;
    m.pitch_max = *pmax;
    m.pitch_range = *pmax - *pmin;
    double sp = 0.0, sz = 0.0;
    for (std::size_t b = 0; b < loop.bins(); ++b) {
        sp += std::fabs(loop.pitch_mean[b]);
        sz += loop.dz_mean[b];
    }
    m.mean_abs_pitch = sp / static_cast<double>(loop.bins());
    m.mean_dz = sz / static_cast<double>(loop.bins());
    return m;
}

}  // namespace downwash
