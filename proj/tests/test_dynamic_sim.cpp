#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "downwash/dynamic_sim.hpp"
#include "support.hpp"

using namespace downwash;
using testsupport::throws_kind;

namespace {

DynamicProfile profile(double dz_min, double a, double f) {
    DynamicProfile p;
    p.dz_min_m = dz_min;
    p.amplitude_m = a;
    p.frequency_hz = f;
    return p;
}

LoadGrid constant_grid(double c) {
    LoadGrid g = anchored_synthetic_grid();
    std::fill(g.lower.thrust_ratio.begin(), g.lower.thrust_ratio.end(), c);
    return g;
}

// Reference: classical RK4 on the lag ODE at a much finer step.
std::vector<double> rk4_reference(const LoadGrid& grid, const DynamicProfile& p,
                                  const VehicleGeometry& geom, const LagModel& lag, int refine) {
    const auto target = [&](double t) {
        const double dz = separation_trajectory(p, t).dz / geom.arm_length_m;
        return query_loads(grid, Vehicle::lower, 0.0, std::max(dz, grid.dz.front())).thrust_ratio;
    };
    const auto rhs = [&](double t, double y) {
        return (target(t) - y) / lag.tau(separation_trajectory(p, t).dz);
    };
    const long n = std::lround(p.duration_s() * p.sample_rate_hz);
    const double h = 1.0 / (p.sample_rate_hz * refine);
    std::vector<double> out;
    double y = target(0.0);
    for (long i = 0; i < n; ++i) {
        if (i > 0) {
            for (int k = 0; k < refine; ++k) {
                const double t = (static_cast<double>(i - 1) + static_cast<double>(k) / refine) / p.sample_rate_hz;
                const double k1 = rhs(t, y);
                const double k2 = rhs(t + h / 2, y + h / 2 * k1);
                const double k3 = rhs(t + h / 2, y + h / 2 * k2);
                const double k4 = rhs(t + h, y + h * k3);
                y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            }
        }
        const double tt = target(static_cast<double>(i) / p.sample_rate_hz);
        out.push_back(tt + lag.gain * (tt - y));
    }
    return out;
}

}  // namespace

TEST_CASE("separation trajectory") {
    const DynamicProfile p = profile(0.03, 0.09, 1.0);
    const double t_low = (p.ramp_up_cycles + 0.75) / p.frequency_hz;
    const double t_high = (p.ramp_up_cycles + 0.25) / p.frequency_hz;
    CHECK(separation_trajectory(p, t_low).dz == p.dz_min_m);
    CHECK(separation_trajectory(p, t_high).dz == p.dz_min_m + 2.0 * p.amplitude_m);
    CHECK(peak_rate(p) == doctest::Approx(0.5655).epsilon(1e-4));
    CHECK(std::fabs(peak_rate(p) - 0.565) < 1e-3);
    CHECK(separation_trajectory(p, 0.0).dz == p.dz_min_m);
    CHECK(separation_trajectory(p, p.duration_s() + 1.0).dz == p.dz_min_m);

    // Ramp-up amplitude grows linearly: 2.25 of 4 ramp cycles at the crest.
    const double t_ramp = 2.25 / p.frequency_hz;
    CHECK(separation_trajectory(p, t_ramp).dz ==
          doctest::Approx(p.dz_min_m + 2.0 * (2.25 / 4.0) * p.amplitude_m));

    // dz_dot is the time derivative, ramps included.
    for (double t : {0.3, 1.7, 10.1, 45.2, 46.9}) {
        const double e = 1e-6;
        const double fd = (separation_trajectory(p, t + e).dz - separation_trajectory(p, t - e).dz) / (2 * e);
        CHECK(separation_trajectory(p, t).dz_dot == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("profile validation") {
    CHECK_NOTHROW(profile(0.005, 0.025, 0.1).validate());
    CHECK(throws_kind(ErrorKind::validity, [] { profile(0.1, 0.05, 1.0).validate(); }));
    CHECK(throws_kind(ErrorKind::validity, [] { profile(0.05, 0.2, 1.0).validate(); }));
    CHECK(throws_kind(ErrorKind::validity, [] { profile(0.05, 0.05, 2.0).validate(); }));
    DynamicProfile ext = profile(0.1, 0.2, 2.0);
    ext.extended = true;
    CHECK_NOTHROW(ext.validate());
    CHECK(throws_kind(ErrorKind::domain, [] { profile(-0.1, 0.05, 1.0).validate(); }));
    CHECK(profile(0.05, 0.05, 1.0).total_cycles() == 48);
}

TEST_CASE("simulation basics") {
    const VehicleGeometry geom;
    const Environment env;
    DynamicProfile p = profile(0.03, 0.05, 1.0);
    const LoadTimeSeries c = simulate_loads(constant_grid(0.8), p, geom, wake_convection_lag(geom, env));
    CHECK(c.size() == 9600);
    for (double t : c.thrust_ratio) CHECK(t == 0.8);

    // Stacked: pitch follows the grid's dx = 0 column, which is zero here.
    const LoadTimeSeries s = simulate_loads(anchored_synthetic_grid(), p, geom, wake_convection_lag(geom, env));
    for (double m : s.pitch_ratio) CHECK(m == 0.0);
    CHECK(std::count(s.clamped.begin(), s.clamped.end(), 1) > 0);

    p.sample_rate_hz = 40.0;
    CHECK(throws_kind(ErrorKind::aliasing, [&] {
        simulate_loads(anchored_synthetic_grid(), p, geom, zero_lag());
    }));
}

TEST_CASE("zero lag retraces itself") {
    const VehicleGeometry geom;
    for (double f : {0.1, 0.5, 1.0}) {
        const DynamicProfile p = profile(0.05, 0.09, f);
        const LoadTimeSeries s = stable_portion(simulate_loads(anchored_synthetic_grid(), p, geom, zero_lag()), p);
        const HysteresisLoop loop = phase_average(s);
        CHECK(std::fabs(loop.loop_area) < 1e-9);
        CHECK(std::fabs(loop.asymmetry) < 1e-9);
    }
}

TEST_CASE("lagged loop orientation") {
    const VehicleGeometry geom;
    const Environment env;
    const DynamicProfile p = profile(0.05, 0.05, 1.0);
    const LoadTimeSeries s =
        stable_portion(simulate_loads(anchored_synthetic_grid(), p, geom, wake_convection_lag(geom, env)), p);
    const HysteresisLoop loop = phase_average(s);
    CHECK(loop.loop_area > 0.0);
    CHECK(loop.asymmetry > 0.0);
    // Bins b and its mirror see the same dz; retreat must not fall below approach.
    const std::size_t nb = loop.bins();
    int strictly = 0;
    for (std::size_t b = 0; b < nb / 4; ++b) {
        const std::size_t m = nb / 2 - 1 - b;  // mirror of retreat bin b about pi/2
        CHECK(loop.dz_mean[b] == doctest::Approx(loop.dz_mean[m]).epsilon(1e-12));
        CHECK(loop.thrust_mean[b] >= loop.thrust_mean[m] - 1e-12);
        strictly += loop.thrust_mean[b] > loop.thrust_mean[m] ? 1 : 0;
    }
    CHECK(strictly > 0);

    // The pure lag state alone traces the opposite orientation.
    LagModel state = wake_convection_lag(geom, env);
    state.gain = -1.0;
    const HysteresisLoop lagged =
        phase_average(stable_portion(simulate_loads(anchored_synthetic_grid(), p, geom, state), p));
    CHECK(lagged.loop_area < 0.0);
}

TEST_CASE("exact exponential stepping matches a fine RK4 oracle") {
    const VehicleGeometry geom;
    const Environment env;
    DynamicProfile p = profile(0.05, 0.05, 1.0);
    p.ramp_up_cycles = 1;
    p.stable_cycles = 2;
    p.ramp_down_cycles = 1;
    const LagModel lag = wake_convection_lag(geom, env);
    const LoadTimeSeries s = simulate_loads(anchored_synthetic_grid(), p, geom, lag);
    const std::vector<double> ref = rk4_reference(anchored_synthetic_grid(), p, geom, lag, 100);
    REQUIRE(ref.size() == s.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::fabs(ref[i] - s.thrust_ratio[i]));
    CHECK(worst < 1e-5);
}

TEST_CASE("halving the internal step leaves the loop unchanged") {
    const VehicleGeometry geom;
    const Environment env;
    const DynamicProfile p = profile(0.05, 0.05, 1.0);
    SimOptions coarse;
    SimOptions fine;
    fine.substeps = 2 * coarse.substeps;
    const LagModel lag = wake_convection_lag(geom, env);
    const HysteresisLoop a = phase_average(stable_portion(simulate_loads(anchored_synthetic_grid(), p, geom, lag, coarse), p));
    const HysteresisLoop b = phase_average(stable_portion(simulate_loads(anchored_synthetic_grid(), p, geom, lag, fine), p));
    for (std::size_t i = 0; i < a.bins(); ++i) {
        CHECK(std::fabs(a.thrust_mean[i] - b.thrust_mean[i]) <= 1e-6 * std::fabs(b.thrust_mean[i]));
    }
}

TEST_CASE("loop area grows with frequency") {
    const VehicleGeometry geom;
    const Environment env;
    const LagModel lag = wake_convection_lag(geom, env);
    double prev = -1.0;
    for (double f : {0.1, 0.5, 1.0}) {
        const DynamicProfile p = profile(0.05, 0.09, f);
        const LoopMetrics m =
            loop_metrics(phase_average(stable_portion(simulate_loads(anchored_synthetic_grid(), p, geom, lag), p)));
        CHECK(m.loop_area > prev);
        prev = m.loop_area;
    }
}

TEST_CASE("offset pitch magnitude decreases with separation") {
    const VehicleGeometry geom;
    const Environment env;
    double prev = 1e9;
    for (double dz_min : {0.1, 0.2, 0.3, 0.5}) {
        DynamicProfile p = profile(dz_min, 0.05, 0.5);
        p.configuration = Configuration::offset;
        p.extended = true;
        const LoopMetrics m = loop_metrics(
            phase_average(stable_portion(simulate_loads(anchored_synthetic_grid(), p, geom, wake_convection_lag(geom, env)), p)));
        CHECK(m.mean_abs_pitch < prev);
        CHECK(m.mean_abs_pitch > 0.0);
        prev = m.mean_abs_pitch;
    }
}

TEST_CASE("phase averaging") {
    LoadTimeSeries s;
    const int bins = 12;
    const double w = 2.0 * std::numbers::pi / bins;
    for (int rep = 0; rep < 5; ++rep) {
        for (int b = 0; b < bins; ++b) {
            for (double off : {0.2, 0.5, 0.8}) {
                s.t.push_back(0.0);
                s.phase.push_back((b + off) * w);
                s.dz.push_back(1.0 + std::sin((b + 0.5) * w));
                s.dz_dot.push_back(0.1 * b);
                s.thrust_ratio.push_back(0.1 * b + 0.3);
                s.pitch_ratio.push_back(-0.01 * b);
                s.cycle.push_back(rep);
                s.clamped.push_back(0);
            }
        }
    }
    const HysteresisLoop loop = phase_average(s, bins);
    for (int b = 0; b < bins; ++b) {
        CHECK(loop.thrust_mean[b] == 0.1 * b + 0.3);
        CHECK(loop.pitch_mean[b] == -0.01 * b);
        CHECK(loop.thrust_std[b] == 0.0);
        CHECK(loop.weight[b] == 15.0);
    }

    LoadTimeSeries flat = s;
    std::fill(flat.thrust_ratio.begin(), flat.thrust_ratio.end(), 0.7);
    const HysteresisLoop fl = phase_average(flat, bins);
    CHECK(std::fabs(fl.loop_area) < 1e-15);
    CHECK(fl.asymmetry == 0.0);

    // A sample exactly on an edge counts half in each neighbour.
    LoadTimeSeries edge = s;
    edge.phase.push_back(3 * w);
    edge.t.push_back(0);
    edge.dz.push_back(0);
    edge.dz_dot.push_back(0);
    edge.thrust_ratio.push_back(0);
    edge.pitch_ratio.push_back(0);
    edge.cycle.push_back(0);
    edge.clamped.push_back(0);
    const HysteresisLoop el = phase_average(edge, bins);
    CHECK(el.weight[2] == 15.5);
    CHECK(el.weight[3] == 15.5);

    CHECK(throws_kind(ErrorKind::binning, [&] { phase_average(s, 720); }));
    CHECK(throws_kind(ErrorKind::argument, [&] { phase_average(s, 4); }));

    HysteresisLoop single;
    single.phase_bin_centers = {1.0};
    single.dz_mean = {0.5};
    single.thrust_mean = {0.9};
    single.pitch_mean = {0.0};
    CHECK(loop_metrics(single).loop_area == 0.0);
}

TEST_CASE("a full run is fast") {
    const VehicleGeometry geom;
    const Environment env;
    const DynamicProfile p = profile(0.05, 0.09, 1.0);
    const auto t0 = std::chrono::steady_clock::now();
    const LoadTimeSeries s = simulate_loads(anchored_synthetic_grid(), p, geom, wake_convection_lag(geom, env));
    phase_average(stable_portion(s, p));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 5.0);
}
