#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "downwash/interaction_loads.hpp"
#include "support.hpp"

using namespace downwash;
using testsupport::throws_kind;

namespace {

// Grid whose every channel is a closed-form function of (dx, dz).
LoadGrid analytic_grid(double a, double b, std::vector<double> dx, std::vector<double> dz) {
    LoadGrid g;
    g.dx = std::move(dx);
    g.dz = std::move(dz);
    for (LoadSurface* s : {&g.upper, &g.lower}) {
        for (double z : g.dz) {
            for (double x : g.dx) {
                const double w = std::exp(-((x / a) * (x / a) + (z / b) * (z / b)));
                s->thrust_ratio.push_back(1.0 - w);
                s->thrust_std.push_back(0.1 * w);
                s->pitch_ratio.push_back(0.05 * x * w);
                s->pitch_std.push_back(0.01 * w);
            }
        }
    }
    return g;
}

std::vector<double> range(double lo, double hi, double step) {
    std::vector<double> v;
    for (int i = 0; lo + i * step <= hi + 1e-12; ++i) v.push_back(lo + i * step);
    return v;
}

}  // namespace

TEST_CASE("synthetic grid anchors") {
    const LoadGrid g = anchored_synthetic_grid();
    CHECK_NOTHROW(g.validate());
    const LoadSample lo = query_loads(g, Vehicle::lower, 0.0, 4.0);
    const LoadSample up = query_loads(g, Vehicle::upper, 0.0, 4.0);
    CHECK(lo.provenance == Provenance::measured_node);
    CHECK(lo.thrust_ratio == doctest::Approx(0.65).epsilon(0.002));
    CHECK(up.thrust_ratio == doctest::Approx(0.90).epsilon(0.002));

    const LoadSample far = query_loads(g, Vehicle::lower, 0.0, 40.0);
    CHECK(far.provenance == Provenance::asymptotic);
    CHECK(far.thrust_ratio == 1.0);
    CHECK(far.pitch_ratio == 0.0);
    CHECK(far.thrust_std == 0.0);
    CHECK(far.pitch_std == 0.0);
    // Beyond z = 19 the surface is within 2 % of hover already.
    CHECK(query_loads(g, Vehicle::lower, 0.0, 25.0).thrust_ratio > 0.98);

    const double lower_peak = *std::max_element(g.lower.thrust_std.begin(), g.lower.thrust_std.end());
    const double upper_peak = *std::max_element(g.upper.thrust_std.begin(), g.upper.thrust_std.end());
    CHECK(lower_peak / upper_peak == doctest::Approx(100.0));
}

TEST_CASE("queries are exact at nodes and bounded between them") {
    const LoadGrid g = anchored_synthetic_grid();
    for (Vehicle v : {Vehicle::lower, Vehicle::upper}) {
        const LoadSurface& s = g.surface(v);
        for (std::size_t iz = 0; iz < g.ndz(); ++iz) {
            for (std::size_t ix = 0; ix < g.ndx(); ++ix) {
                const LoadSample q = query_loads(g, v, g.dx[ix], g.dz[iz]);
                const std::size_t k = g.index(iz, ix);
                CHECK(q.provenance == Provenance::measured_node);
                CHECK(q.thrust_ratio == s.thrust_ratio[k]);
                CHECK(q.thrust_std == s.thrust_std[k]);
                CHECK(q.pitch_ratio == s.pitch_ratio[k]);
                CHECK(q.pitch_std == s.pitch_std[k]);
            }
        }
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> px(0.0, 8.0), pz(3.0, 34.0);
    for (int k = 0; k < 500; ++k) {
        const double x = px(rng);
        const double z = pz(rng);
        const LoadSample q = query_loads(g, Vehicle::lower, x, z);
        const std::size_t ix = std::min<std::size_t>(static_cast<std::size_t>(x / 0.5), g.ndx() - 2);
        const std::size_t iz = std::min<std::size_t>(static_cast<std::size_t>(z - 3.0), g.ndz() - 2);
        const double c[4] = {g.lower.thrust_ratio[g.index(iz, ix)],
                             g.lower.thrust_ratio[g.index(iz, ix + 1)],
                             g.lower.thrust_ratio[g.index(iz + 1, ix)],
                             g.lower.thrust_ratio[g.index(iz + 1, ix + 1)]};
        CHECK(q.thrust_ratio >= *std::min_element(c, c + 4) - 1e-15);
        CHECK(q.thrust_ratio <= *std::max_element(c, c + 4) + 1e-15);
        CHECK(q.provenance == Provenance::interpolated);
    }
}

TEST_CASE("out-of-range policies") {
    const LoadGrid g = anchored_synthetic_grid();
    const LoadSample edge = query_loads(g, Vehicle::lower, 0.0, 3.0);
    const LoadSample half = query_loads(g, Vehicle::lower, 0.0, 2.5);
    CHECK(half.thrust_ratio == doctest::Approx(edge.thrust_ratio + 0.5 * (1.0 - edge.thrust_ratio)));
    CHECK(half.provenance == Provenance::interpolated);
    const LoadSample clamped = query_loads(g, Vehicle::lower, 0.0, 1.0, OutOfRange::clamp);
    CHECK(clamped.thrust_ratio == edge.thrust_ratio);
    CHECK(clamped.clamped);
    CHECK(throws_kind(ErrorKind::range,
                      [&] { query_loads(g, Vehicle::lower, 0.0, 1.0, OutOfRange::error); }));
    for (double x : {8.5, 9.0, 20.0}) {
        const LoadSample s = query_loads(g, Vehicle::upper, x, 10.0);
        CHECK(s.thrust_ratio == 1.0);
        CHECK(s.pitch_ratio == 0.0);
    }
    // Mirror: thrust even, pitch odd in dx.
    const LoadSample pos = query_loads(g, Vehicle::lower, 2.0, 5.0);
    const LoadSample neg = query_loads(g, Vehicle::lower, -2.0, 5.0);
    CHECK(neg.thrust_ratio == pos.thrust_ratio);
    CHECK(neg.pitch_ratio == -pos.pitch_ratio);
    CHECK(throws_kind(ErrorKind::state, [] { query_loads(LoadGrid{}, Vehicle::lower, 0, 4); }));
}

TEST_CASE("influence envelope of the anchored grid") {
    const LoadGrid g = anchored_synthetic_grid();
    const InteractionEnvelope env = influence_envelope(g, Vehicle::lower);
    CHECK(env.lateral_extent == doctest::Approx(3.0).epsilon(0.2));
    CHECK(env.axial_extent == doctest::Approx(19.0).epsilon(0.2));
    // Closed-form contour: x^2/1.755^2 + z^2/120.5 = ln(0.3997 / 0.02).
    const double c = std::log(0.3997 / 0.02);
    CHECK(env.a_lateral == doctest::Approx(1.755 * std::sqrt(c)).epsilon(0.02));
    CHECK(env.b_axial == doctest::Approx(std::sqrt(120.5 * c)).epsilon(0.02));
    CHECK(env.b_axial > env.a_lateral);

    double prev_a = 0.0;
    double prev_b = 0.0;
    for (double t : {0.7, 0.8, 0.9, 0.95, 0.98, 0.99}) {
        const InteractionEnvelope e = influence_envelope(g, Vehicle::lower, t);
        CHECK(e.lateral_extent >= prev_a);
        CHECK(e.axial_extent >= prev_b);
        prev_a = e.lateral_extent;
        prev_b = e.axial_extent;
    }
    CHECK(throws_kind(ErrorKind::argument, [&] { influence_envelope(g, Vehicle::lower, 1.0); }));
    CHECK(throws_kind(ErrorKind::degenerate, [&] { influence_envelope(g, Vehicle::lower, 0.55); }));
}

TEST_CASE("envelope recovers the generator's axis ratio") {
    for (auto [a, b] : {std::pair{2.0, 10.0}, std::pair{1.5, 6.0}, std::pair{3.0, 4.5}}) {
        const LoadGrid g = analytic_grid(a, b, range(0, 3 * a, a / 8), range(0, 3 * b, b / 8));
        const InteractionEnvelope e = influence_envelope(g, Vehicle::lower, 0.9);
        CHECK(e.b_axial / e.a_lateral == doctest::Approx(b / a).epsilon(0.05));
        // ln(1 / 0.1) sets the contour's scale.
        CHECK(e.a_lateral == doctest::Approx(a * std::sqrt(std::log(10.0))).epsilon(0.02));
    }

    LoadGrid capped = analytic_grid(2.0, 10.0, range(0, 6, 0.5), range(0, 30, 1));
    for (double& t : capped.lower.thrust_ratio) t = std::min(t, 0.98);
    CHECK(throws_kind(ErrorKind::degenerate, [&] { influence_envelope(capped, Vehicle::lower, 0.999); }));
}

TEST_CASE("unsteadiness envelope") {
    const LoadGrid g = anchored_synthetic_grid();
    const InteractionEnvelope env = unsteadiness_envelope(g, Vehicle::lower);
    CHECK(env.lateral_extent == doctest::Approx(4.5).epsilon(0.2));
    CHECK(env.axial_extent == doctest::Approx(17.0).epsilon(0.2));
    CHECK(env.threshold == doctest::Approx(0.05 * 0.08));

    const InteractionEnvelope up = unsteadiness_envelope(g, Vehicle::upper);
    CHECK(up.threshold == doctest::Approx(env.threshold / 100.0));

    LoadGrid calm = g;
    std::fill(calm.lower.thrust_std.begin(), calm.lower.thrust_std.end(), 0.0);
    CHECK(throws_kind(ErrorKind::degenerate, [&] { unsteadiness_envelope(calm, Vehicle::lower); }));
}

TEST_CASE("peak pitch offset") {
    const LoadGrid g = anchored_synthetic_grid();
    const std::vector<PitchPeak> lo = peak_pitch_offset(g, Vehicle::lower);
    const std::vector<PitchPeak> up = peak_pitch_offset(g, Vehicle::upper);
    REQUIRE(lo.size() == g.ndz());
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(lo[i].dx - 2.0) <= 0.5);
    CHECK(std::fabs(up[0].pitch_ratio / lo[0].pitch_ratio - 1.0 / 3.0) < 1e-12);

    // Even-in-dx grid with a symmetric axis: the tie goes to the smaller dx.
    LoadGrid sym = analytic_grid(2.0, 10.0, {-2, -1, 0, 1, 2}, {3, 4, 5});
    for (double& p : sym.lower.pitch_ratio) p = 0.1;
    for (const PitchPeak& p : peak_pitch_offset(sym, Vehicle::lower)) CHECK(p.dx == -2.0);
    LoadGrid even = analytic_grid(2.0, 10.0, {-2, -1, 0, 1, 2}, {3, 4, 5});
    for (std::size_t iz = 0; iz < even.ndz(); ++iz) {
        for (std::size_t ix = 0; ix < even.ndx(); ++ix) {
            even.lower.pitch_ratio[even.index(iz, ix)] = 1.0 / (1.0 + even.dx[ix] * even.dx[ix]);
        }
    }
    for (const PitchPeak& p : peak_pitch_offset(even, Vehicle::lower)) CHECK(p.dx == 0.0);

    const LoadGrid narrow = analytic_grid(2.0, 10.0, {0, 1}, {3, 4});
    CHECK(throws_kind(ErrorKind::range, [&] { peak_pitch_offset(narrow, Vehicle::lower); }));
}

TEST_CASE("momentum deficit estimate") {
    const LoadGrid g = anchored_synthetic_grid();
    JetScaling s;
    VehicleGeometry geom;
    const DeficitModel m = DeficitModel::calibrate(s, geom, g);
    CHECK(m.calibration_dx() == 0.0);
    CHECK(m.calibration_dz() == 7.0);
    const std::size_t k = g.index(4, 0);
    CHECK(m.predict(0.0, 7.0) == doctest::Approx(g.lower.thrust_ratio[k]).epsilon(1e-12));

    CHECK(m.predict(1000.0, 10.0) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = 0.0;
    for (double z = 6.6; z <= 40.0; z += 0.05) {
        const double p = m.predict(0.0, z);
        CHECK(p > prev);
        prev = p;
    }
    CHECK(throws_kind(ErrorKind::validity, [&] { m.predict(0.0, 6.5); }));
    CHECK(deficit_rank_correlation(m, g) > 0.8);

    // Same prediction with the jet expressed in metres.
    UnitFrame frame{geom.arm_length_m, 4.0};
    const JetScaling si = s.converted(LengthUnit::meters, VelocityUnit::m_per_s, frame);
    const DeficitModel msi = DeficitModel::calibrate(si, geom, g);
    CHECK(msi.predict(1.0, 12.0) == doctest::Approx(m.predict(1.0, 12.0)).epsilon(1e-9));
}

TEST_CASE("spearman") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman({1, 2, 3, 4}, {1, 4, 9, 1000}) == doctest::Approx(1.0));
    CHECK(spearman({1, 1, 2, 3}, {5, 5, 6, 7}) == doctest::Approx(1.0));
}
