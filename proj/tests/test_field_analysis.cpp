#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "downwash/field_analysis.hpp"
#include "support.hpp"

using namespace downwash;
using testsupport::throws_kind;

namespace {

VelocityField ramp_field(std::vector<double> x, std::vector<double> z, double offset) {
    VelocityField f = VelocityField::zeros(std::move(x), std::move(z));
    for (std::size_t iz = 0; iz < f.nz(); ++iz) {
        for (std::size_t ix = 0; ix < f.nx(); ++ix) {
            f.u[f.index(iz, ix)] = offset + 2.0 * f.z[iz] - 0.5 * f.x[ix] * f.x[ix];
            f.v[f.index(iz, ix)] = offset - f.x[ix] * f.z[iz];
        }
    }
    return f;
}

std::vector<double> axis(double lo, double hi, std::size_t n) {
    GridSpec g{lo, hi, n, lo, hi, n};
    return g.x_axis();
}

DownwashModel default_model() {
    VehicleGeometry geom;
    Environment env;
    JetScaling s;
    return DownwashModel(geom, s, NearFieldConfig::defaults(geom, env, s));
}

VelocityProfile far_profile(const JetScaling& s, double z, const std::vector<double>& x) {
    std::vector<double> u, v;
    for (double xi : x) {
        u.push_back(axial_profile(s, z, xi));
        v.push_back(lateral_profile(s, z, xi));
    }
    return VelocityProfile::make(z, x, u, v);
}

}  // namespace

TEST_CASE("time average basics") {
    VelocityField a = ramp_field(axis(-1, 1, 5), axis(0, 2, 4), 0.0);
    CHECK(time_average({a}) == a);

    VelocityField neg = a;
    for (double& u : neg.u) u = -u;
    for (double& v : neg.v) v = -v;
    VelocityField mean = time_average({a, neg});
    CHECK(mean.frame_count == 2);
    for (std::size_t i = 0; i < mean.size(); ++i) {
        CHECK(mean.u[i] == 0.0);
        CHECK(mean.v[i] == 0.0);
    }

    VelocityField shifted = ramp_field(axis(-1, 1, 5), axis(0.1, 2, 4), 0.0);
    CHECK(throws_kind(ErrorKind::shape, [&] { time_average({a, shifted}); }));
    CHECK(throws_kind(ErrorKind::argument, [&] { time_average({}); }));
}

TEST_CASE("time average weights by frame count and skips masked nodes") {
    VelocityField a = ramp_field(axis(-1, 1, 3), axis(0, 1, 2), 0.0);
    VelocityField b = ramp_field(axis(-1, 1, 3), axis(0, 1, 2), 4.0);
    b.frame_count = 3;
    b.valid[1] = 0;
    b.u[1] = 0.0;
    VelocityField m = time_average({a, b});
    CHECK(m.frame_count == 4);
    CHECK(m.u[0] == doctest::Approx(a.u[0] + 3.0));
    CHECK(m.u[1] == a.u[1]);
    CHECK(m.valid[1] == 1);
    a.valid[1] = 0;
    a.u[1] = 0.0;
    CHECK(time_average({a, b}).valid[1] == 0);
}

TEST_CASE("time average of noisy frames converges like sigma / sqrt(N)") {
    const DownwashModel model = default_model();
    const GridSpec grid{-2.0, 2.0, 21, 7.0, 12.0, 11};
    const VelocityField truth = evaluate_field(model, grid);
    const double sigma = 0.05;
    const int n = 1000;
    std::mt19937_64 rng(42);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<VelocityField> frames(n, truth);
    for (VelocityField& f : frames) {
        for (double& u : f.u) u += noise(rng);
    }
    const VelocityField mean = time_average(frames);
    CHECK(mean == time_average_serial(frames));
    double ss = 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const double d = mean.u[i] - truth.u[i];
        ss += d * d;
        worst = std::max(worst, std::fabs(d));
    }
    const double expected = sigma / std::sqrt(static_cast<double>(n));
    const double rms = std::sqrt(ss / static_cast<double>(mean.size()));
    CHECK(rms == doctest::Approx(expected).epsilon(0.15));
    CHECK(worst < 5.0 * expected);
}

TEST_CASE("stitch identity and exact union") {
    const VelocityField a = ramp_field(axis(-1, 1, 5), axis(0, 3, 7), 0.0);
    CHECK(stitch({a}) == a);

    const VelocityField b = ramp_field(axis(-1, 1, 5), axis(2, 5, 7), 0.0);
    for (Blend blend : {Blend::average, Blend::linear_ramp}) {
        const VelocityField s = stitch({a, b}, {blend, 0.0});
        REQUIRE(s.nz() == 11);
        CHECK(s.z.front() == 0.0);
        CHECK(s.z.back() == 5.0);
        const VelocityField direct = ramp_field(a.x, s.z, 0.0);
        CHECK(s.u == direct.u);
        CHECK(s.v == direct.v);
    }
}

TEST_CASE("stitch ramps monotonically across an offset overlap") {
    const VelocityField a = ramp_field(axis(-1, 1, 3), axis(0, 3, 13), 0.0);
    const VelocityField b = ramp_field(axis(-1, 1, 3), axis(2, 5, 13), 1.0);
    const VelocityField s = stitch({a, b});
    // Offset between the sections as seen through the composite.
    double prev = -1.0;
    for (std::size_t iz = 0; iz < s.nz(); ++iz) {
        const double z = s.z[iz];
        const double c = s.u[s.index(iz, 1)] - 2.0 * z;
        if (z < 2.0) {
            CHECK(c == 0.0);
        } else if (z > 3.0) {
            CHECK(c == 1.0);
        } else {
            CHECK(c == doctest::Approx(z - 2.0).epsilon(1e-12));
            CHECK(c >= prev);
        }
        prev = c;
    }
}

TEST_CASE("stitch rejects thin overlaps and is associative") {
    const VelocityField a = ramp_field(axis(-1, 1, 3), axis(0, 3, 13), 0.0);
    const VelocityField thin = ramp_field(axis(-1, 1, 3), axis(2.75, 5.75, 13), 0.0);
    CHECK(throws_kind(ErrorKind::stitch, [&] { stitch({a, thin}); }));
    CHECK_NOTHROW(stitch({a, thin}, {Blend::linear_ramp, 0.25}));

    const VelocityField b = ramp_field(axis(-1, 1, 3), axis(2, 5, 13), 0.3);
    const VelocityField c = ramp_field(axis(-1, 1, 3), axis(3.9, 6.9, 10), -0.7);
    const VelocityField all = stitch({a, b, c});
    const VelocityField left = stitch({stitch({a, b}), c});
    const VelocityField right = stitch({a, stitch({b, c})});
    REQUIRE(all.z == left.z);
    REQUIRE(all.z == right.z);
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(std::fabs(all.u[i] - left.u[i]) <= 1e-9 * std::fabs(all.u[i]) + 1e-15);
        CHECK(std::fabs(all.u[i] - right.u[i]) <= 1e-9 * std::fabs(all.u[i]) + 1e-15);
    }
}

TEST_CASE("extract profile") {
    const VelocityField f = ramp_field(axis(-1, 1, 5), axis(0, 2, 5), 0.0);
    const VelocityProfile on = extract_profile(f, 1.0);
    for (std::size_t ix = 0; ix < f.nx(); ++ix) CHECK(on.u[ix] == f.u[f.index(2, ix)]);

    const VelocityProfile mid = extract_profile(f, 1.25);
    for (std::size_t ix = 0; ix < f.nx(); ++ix) {
        CHECK(mid.u[ix] == doctest::Approx(0.5 * (f.u[f.index(2, ix)] + f.u[f.index(3, ix)])));
    }
    CHECK(extract_profile(f, 1.3, ProfileSampling::nearest).z == 1.5);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pick(0.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const double z = pick(rng);
        const VelocityProfile p = extract_profile(f, z);
        const std::size_t lo = std::min<std::size_t>(static_cast<std::size_t>(z / 0.5), 3);
        for (std::size_t ix = 0; ix < f.nx(); ++ix) {
            const double a = f.u[f.index(lo, ix)];
            const double b = f.u[f.index(lo + 1, ix)];
            CHECK(p.u[ix] >= std::min(a, b) - 1e-12);
            CHECK(p.u[ix] <= std::max(a, b) + 1e-12);
        }
    }
    CHECK(throws_kind(ErrorKind::range, [&] { extract_profile(f, 2.01); }));

    VelocityField masked = f;
    masked.valid[f.index(4, 0)] = 0;
    masked.valid[f.index(4, 1)] = 0;
    CHECK(throws_kind(ErrorKind::data, [&] { extract_profile(masked, 2.0); }));
    masked.valid[f.index(4, 1)] = 1;
    CHECK_NOTHROW(extract_profile(masked, 2.0));
}

TEST_CASE("centerline and maximum") {
    JetScaling s;
    const std::vector<double> x = axis(-3, 3, 61);
    const CenterlineMax jet = centerline_and_max(far_profile(s, 9.0, x));
    CHECK(jet.u_c == jet.u_max);
    CHECK(jet.x_at_max == 0.0);

    std::vector<double> u;
    for (double xi : x) {
        u.push_back(std::exp(-0.5 * std::pow((xi - 1.0) / 0.4, 2)) +
                    std::exp(-0.5 * std::pow((xi + 1.0) / 0.4, 2)));
    }
    const CenterlineMax two = centerline_and_max(VelocityProfile::make(2.0, x, u, u));
    CHECK(two.u_c == doctest::Approx(2.0 * std::exp(-0.5 / 0.16)));
    CHECK(two.u_c < two.u_max);
    CHECK(std::fabs(std::fabs(two.x_at_max) - 1.0) <= 0.1 + 1e-12);

    std::vector<double> flat(x.size(), 0.7);
    const CenterlineMax c = centerline_and_max(VelocityProfile::make(2.0, x, flat, flat));
    CHECK(c.u_c == 0.7);
    CHECK(c.u_max == 0.7);
    CHECK(c.x_at_max == 0.0);

    const std::vector<double> pos = axis(0.5, 2, 4);
    CHECK(throws_kind(ErrorKind::range, [&] {
        centerline_and_max(VelocityProfile::make(1.0, pos, {1, 1, 1, 1}, {0, 0, 0, 0}));
    }));
}

TEST_CASE("merge point of the synthesized field") {
    const DownwashModel model = default_model();
    const GridSpec grid;  // 0.05 l steps
    const VelocityField f = evaluate_field(model, grid);
    const double zm = detect_merge_point(f);
    const double dz = f.z[1] - f.z[0];
    CHECK(std::fabs(zm - model.scaling().merge_point) <= dz + 1e-12);

    double prev = 1e9;
    for (double eps : {0.005, 0.01, 0.02, 0.05, 0.1, 0.19}) {
        const double z = detect_merge_point(f, eps);
        CHECK(z <= prev);
        prev = z;
    }

    const GridSpec far{-3.0, 3.0, 61, 8.0, 12.0, 9};
    CHECK(detect_merge_point(evaluate_field(model, far)) == 8.0);

    const GridSpec near{-3.0, 3.0, 61, 0.5, 3.0, 11};
    try {
        detect_merge_point(evaluate_field(model, near));
        FAIL("expected NotMergedError");
    } catch (const NotMergedError& e) {
        CHECK(e.min_gap() > 0.02);
    }
    CHECK(throws_kind(ErrorKind::argument, [&] { detect_merge_point(f, 0.2); }));
    CHECK(throws_kind(ErrorKind::argument, [&] { detect_merge_point(f, 0.02, 0); }));
}

TEST_CASE("half width from profiles") {
    JetScaling s;
    const std::vector<double> x = axis(-3, 3, 121);
    const double step = x[1] - x[0];
    for (double z : {7.0, 9.5, 12.0, 20.0}) {
        const VelocityProfile p = far_profile(s, z, x);
        const double r = half_width_from_profile(p);
        CHECK(std::fabs(r - half_width(s, z)) <= step);
        for (double k : {0.25, 2.0, 1024.0}) {
            VelocityProfile q = p;
            for (double& u : q.u) u *= k;
            CHECK(half_width_from_profile(q) == r);
        }
        VelocityProfile q = p;
        for (double& u : q.u) u *= 3.0;
        CHECK(half_width_from_profile(q) == doctest::Approx(r).epsilon(1e-14));
    }

    std::vector<double> u;
    for (double xi : x) u.push_back(std::exp(-xi * xi));
    const VelocityProfile sym = VelocityProfile::make(9.0, x, u, u);
    const double r = half_width_from_profile(sym);
    CHECK(r == doctest::Approx(std::sqrt(std::log(2.0))).epsilon(2e-3));

    std::vector<double> bi;
    for (double xi : x) {
        bi.push_back(std::exp(-4.0 * (xi - 1) * (xi - 1)) + std::exp(-4.0 * (xi + 1) * (xi + 1)));
    }
    CHECK(throws_kind(ErrorKind::validity,
                      [&] { half_width_from_profile(VelocityProfile::make(2, x, bi, bi)); }));

    std::vector<double> wide(x.size(), 1.0);
    wide[60] = 1.001;
    CHECK(throws_kind(ErrorKind::range,
                      [&] { half_width_from_profile(VelocityProfile::make(2, x, wide, wide)); }));
}

TEST_CASE("evaluate, extract, half width round trip") {
    const DownwashModel model = default_model();
    const GridSpec grid;
    const VelocityField f = evaluate_field(model, grid);
    const double dx = f.x[1] - f.x[0];
    const double dz = f.z[1] - f.z[0];
    for (double z = 7.0; z <= 20.0 + 1e-9; z += 0.5) {
        const VelocityProfile p = extract_profile(f, z);
        CHECK(std::fabs(half_width_from_profile(p) - half_width(model.scaling(), p.z)) <= dx);
        CHECK(std::fabs(p.z - z) <= dz);
    }
}

TEST_CASE("similarity collapse") {
    JetScaling s;
    const std::vector<double> x = axis(-3, 3, 241);
    std::vector<VelocityProfile> exact;
    for (double z : {7.0, 8.0, 9.0, 10.0, 11.0, 12.0}) exact.push_back(far_profile(s, z, x));
    const CollapseReport rep = similarity_collapse(exact, s);
    CHECK(rep.rms_residual_axial < 1e-12);
    CHECK(rep.rms_residual_lateral < 1e-12);
    CHECK(rep.stations.size() == 6);
    for (const ScaledProfile& sp : rep.scaled_profiles) {
        for (double xi : sp.xi) CHECK(std::fabs(xi) <= 2.0);
    }

    // Multiplicative noise: expected residual is sigma * rms(f) over the
    // samples inside the window.
    double sf = 0.0;
    std::size_t nf = 0;
    for (const ScaledProfile& sp : rep.scaled_profiles) {
        for (double xi : sp.xi) {
            sf += axial_shape(std::fabs(xi)) * axial_shape(std::fabs(xi));
            ++nf;
        }
    }
    const double expected = 0.05 * std::sqrt(sf / static_cast<double>(nf));
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> noise(0.0, 0.05);
    double mean = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
        std::vector<VelocityProfile> noisy = exact;
        for (VelocityProfile& p : noisy) {
            for (double& u : p.u) u *= 1.0 + noise(rng);
        }
        mean += similarity_collapse(noisy, s).rms_residual_axial / 100.0;
    }
    CHECK(mean == doctest::Approx(expected).epsilon(0.05));

    const std::vector<VelocityProfile> pre{far_profile(s, 7.0, x), VelocityProfile::make(5.0, x, x, x)};
    CHECK(throws_kind(ErrorKind::validity, [&] { similarity_collapse(pre, s); }));

    const DownwashModel model = default_model();
    std::vector<double> u, v;
    for (double xi : x) {
        const VelocityPair w = model.at(xi, 3.0);
        u.push_back(w.u);
        v.push_back(w.v);
    }
    CollapseOptions force;
    force.allow_pre_merge = true;
    const CollapseReport bad =
        similarity_collapse({VelocityProfile::make(3.0, x, u, v)}, s, force);
    CHECK(bad.rms_residual_axial > 0.2);
}

TEST_CASE("downwash speed") {
    VelocityField f = VelocityField::zeros({0.0, 1.0}, {0.0});
    f.u = {3.0, -2.0};
    f.v = {4.0, 0.0};
    const std::vector<double> s = downwash_speed(f);
    CHECK(s[0] == 5.0);
    CHECK(s[1] == 2.0);
    const VelocityField g = evaluate_field(default_model(), GridSpec{-2, 2, 17, 0.5, 10, 20});
    const std::vector<double> sg = downwash_speed(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(sg[i] >= std::max(std::fabs(g.u[i]), std::fabs(g.v[i])));
    }
}
