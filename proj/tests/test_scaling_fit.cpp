#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "downwash/scaling_fit.hpp"
#include "support.hpp"

using namespace downwash;
using testsupport::throws_kind;

namespace {

std::vector<double> stations(double lo, double hi, int n) {
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) z[i] = lo + (hi - lo) * i / (n - 1);
    return z;
}

GrowthSeries growth_of(const JetScaling& s, const std::vector<double>& z) {
    GrowthSeries g;
    g.z = z;
    for (double zi : z) g.r_half.push_back(s.spread_rate * (zi - s.virtual_origin));
    return g;
}

DecaySeries decay_of(const JetScaling& s, const std::vector<double>& z) {
    DecaySeries d;
    d.z = z;
    for (double zi : z) d.u_c.push_back(s.initial_velocity * s.decay_product / (zi - s.virtual_origin));
    return d;
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST_CASE("line fit") {
    const LineFit f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(throws_kind(ErrorKind::fit, [] { fit_line({2, 2, 2}, {1, 2, 3}); }));
    CHECK(throws_kind(ErrorKind::shape, [] { fit_line({1, 2, 3}, {1, 2}); }));
    CHECK(throws_kind(ErrorKind::domain, [] { fit_line({1, 2, 3}, {1, 2, 3}, {1, 0, 1}); }));

    // A heavily weighted point pulls the line through it.
    const LineFit w = fit_line({0, 1, 2}, {0, 1, 0}, {1, 1e12, 1});
    CHECK(w.intercept + w.slope == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("growth fit recovers the reference parameters") {
    JetScaling s;
    const GrowthFit f = fit_half_width_growth(growth_of(s, stations(7, 12, 50)));
    CHECK(rel(f.spread_rate, 0.0667) < 1e-10);
    CHECK(rel(f.virtual_origin, -6.0585) < 1e-10);
    CHECK(f.residual_rms < 1e-14);

    GrowthSeries two;
    two.z = {7.0, 9.0};
    two.r_half = {0.9, 1.3};
    const GrowthFit t = fit_half_width_growth(two);
    CHECK(t.spread_rate == doctest::Approx(0.2));
    CHECK(t.residual_rms < 1e-15);

    GrowthSeries flat;
    flat.z = {8.0, 8.0, 8.0};
    flat.r_half = {1.0, 1.1, 0.9};
    CHECK(throws_kind(ErrorKind::fit, [&] { fit_half_width_growth(flat); }));
}

TEST_CASE("growth fit is translation equivariant") {
    JetScaling s;
    GrowthSeries g = growth_of(s, stations(7, 12, 20));
    const GrowthFit base = fit_half_width_growth(g);
    for (double c : {-3.0, 0.5, 10.0}) {
        GrowthSeries shifted = g;
        for (double& z : shifted.z) z += c;
        const GrowthFit f = fit_half_width_growth(shifted);
        CHECK(f.spread_rate == doctest::Approx(base.spread_rate).epsilon(1e-12));
        CHECK(f.virtual_origin == doctest::Approx(base.virtual_origin + c).epsilon(1e-12));
    }
}

TEST_CASE("decay fit recovers the reference parameters") {
    JetScaling s;
    const DecayFit f = fit_centerline_decay(decay_of(s, stations(7, 12, 50)), 1.0);
    CHECK(rel(f.decay_product, 9.508) < 1e-10);
    CHECK(rel(f.virtual_origin, -6.0585) < 1e-10);
    CHECK(f.residual_rms < 1e-14);

    DecaySeries scaled = decay_of(s, stations(7, 12, 50));
    for (double& u : scaled.u_c) u *= 4.12;
    const DecayFit k = fit_centerline_decay(scaled, 4.12);
    CHECK(k.decay_product == doctest::Approx(f.decay_product).epsilon(1e-13));
    CHECK(k.virtual_origin == doctest::Approx(f.virtual_origin).epsilon(1e-13));

    DecaySeries bad = decay_of(s, stations(7, 12, 5));
    bad.u_c[2] = 0.0;
    CHECK(throws_kind(ErrorKind::domain, [&] { fit_centerline_decay(bad, 1.0); }));
}

TEST_CASE("fits are invariant to sample order") {
    JetScaling s;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 0.01);
    GrowthSeries g = growth_of(s, stations(7, 12, 30));
    DecaySeries d = decay_of(s, stations(7, 12, 30));
    for (double& r : g.r_half) r *= 1.0 + noise(rng);
    for (double& u : d.u_c) u *= 1.0 + noise(rng);
    const FitResult ref = joint_fit(g, d, 1.0);
    for (int k = 0; k < 10; ++k) {
        std::vector<std::size_t> perm(g.z.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        GrowthSeries gp;
        DecaySeries dp;
        for (std::size_t i : perm) {
            gp.z.push_back(g.z[i]);
            gp.r_half.push_back(g.r_half[i]);
            dp.z.push_back(d.z[i]);
            dp.u_c.push_back(d.u_c[i]);
        }
        const FitResult f = joint_fit(gp, dp, 1.0);
        CHECK(f.scaling == ref.scaling);
        CHECK(fit_half_width_growth(gp).spread_rate == fit_half_width_growth(g).spread_rate);
        CHECK(fit_centerline_decay(dp, 1.0).decay_product ==
              fit_centerline_decay(d, 1.0).decay_product);
    }
}

TEST_CASE("joint fit on consistent data matches independent fits") {
    for (const JetScaling& s :
         {JetScaling{}, JetScaling{0.07668, 10.11, -5.817, 6.5, 1.0}}) {
        const std::vector<double> z = stations(7, 12, 50);
        const FitResult f = joint_fit(growth_of(s, z), decay_of(s, z), 1.0);
        CHECK_FALSE(f.z0_fallback);
        CHECK(rel(f.scaling.spread_rate, s.spread_rate) < 1e-8);
        CHECK(rel(f.scaling.decay_product, s.decay_product) < 1e-8);
        CHECK(rel(f.scaling.virtual_origin, s.virtual_origin) < 1e-8);
        CHECK(rel(f.scaling.virtual_origin, f.z0_growth) < 1e-8);
        CHECK(rel(f.scaling.virtual_origin, f.z0_decay) < 1e-8);
        CHECK(f.scaling.merge_point == s.merge_point);
    }
}

TEST_CASE("joint z0 lies between disagreeing series") {
    JetScaling a;
    a.virtual_origin = -6.0;
    JetScaling b;
    b.virtual_origin = -6.1;
    const std::vector<double> z = stations(7, 12, 50);
    const GrowthSeries g = growth_of(a, z);
    const DecaySeries d = decay_of(b, z);
    JointFitOptions plain;
    plain.inverse_variance = false;
    const FitResult f = joint_fit(g, d, 1.0, plain);
    CHECK_FALSE(f.z0_fallback);
    CHECK(f.scaling.virtual_origin < -6.0);
    CHECK(f.scaling.virtual_origin > -6.1);

    // Dense scan: the profiled objective is convex over the seed bracket and
    // its minimum agrees with the search.
    const SeriesWeights w{};
    double best = 1e300;
    double best_z = 0.0;
    std::vector<double> j;
    for (int i = 0; i <= 400; ++i) {
        const double z0 = -6.3 + 0.4 * i / 400.0;
        j.push_back(profiled_objective(g, d, 1.0, z0, w));
        if (j.back() < best) {
            best = j.back();
            best_z = z0;
        }
    }
    for (std::size_t i = 1; i + 1 < j.size(); ++i) CHECK(j[i - 1] + j[i + 1] - 2.0 * j[i] >= -1e-15);
    CHECK(std::fabs(best_z - f.scaling.virtual_origin) <= 0.001);
}

TEST_CASE("joint fit is robust to centerline noise") {
    JetScaling s;
    const std::vector<double> z = stations(7, 12, 50);
    const GrowthSeries g = growth_of(s, z);
    std::vector<double> eb, es, ez;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(1000 + seed);
        std::normal_distribution<double> noise(0.0, 0.02);
        DecaySeries d = decay_of(s, z);
        for (double& u : d.u_c) u *= 1.0 + noise(rng);
        const FitResult f = joint_fit(g, d, 1.0);
        eb.push_back(rel(f.scaling.decay_product, s.decay_product));
        es.push_back(rel(f.scaling.spread_rate, s.spread_rate));
        ez.push_back(rel(f.scaling.virtual_origin, s.virtual_origin));
    }
    auto p95 = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[94];
    };
    CHECK(p95(eb) < 0.03);
    CHECK(p95(es) < 0.03);
    CHECK(p95(ez) < 0.03);
}

TEST_CASE("range restriction and validation") {
    JetScaling s;
    const std::vector<double> z = stations(2, 20, 37);
    JointFitOptions opts;
    opts.restrict_to_range = true;
    const FitResult f = joint_fit(growth_of(s, z), decay_of(s, z), 1.0, opts);
    CHECK(f.fit_range.lo == 7.0);
    CHECK(f.fit_range.hi == 12.0);
    CHECK(restrict_range(growth_of(s, z), opts.range).z.size() == 11);

    GrowthSeries ragged = growth_of(s, z);
    ragged.r_half.pop_back();
    CHECK(throws_kind(ErrorKind::shape, [&] { ragged.validate(); }));
    GrowthSeries negative = growth_of(s, z);
    negative.r_half[0] = -1.0;
    CHECK(throws_kind(ErrorKind::domain, [&] { negative.validate(); }));
}
