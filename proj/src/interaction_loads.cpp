#include "downwash/interaction_loads.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>

#include "downwash/error.hpp"

namespace downwash {
namespace {

struct Cell {
    std::size_t i = 0;
    double t = 0.0;
};

// Cell containing v on an axis with at least two nodes; v must be in range.
Cell locate(const std::vector<double>& axis, double v) {
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    std::size_t hi = static_cast<std::size_t>(it - axis.begin());
    if (hi >= axis.size()) return {axis.size() - 2, 1.0};
    if (hi == 0) hi = 1;
    const std::size_t lo = hi - 1;
    return {lo, (v - axis[lo]) / (axis[hi] - axis[lo])};
}

double bilinear(const std::vector<double>& f, const LoadGrid& g, Cell cx, Cell cz) {
    const std::size_t ix1 = std::min(cx.i + 1, g.ndx() - 1);
    const std::size_t iz1 = std::min(cz.i + 1, g.ndz() - 1);
    const double a = f[g.index(cz.i, cx.i)];
    const double b = f[g.index(cz.i, ix1)];
    const double c = f[g.index(iz1, cx.i)];
    const double d = f[g.index(iz1, ix1)];
    const double lo = a + cx.t * (b - a);
    const double hi = c + cx.t * (d - c);
    return lo + cz.t * (hi - lo);
}

double smoothstep(double t) noexcept {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

// Outside distance in units of the adjacent cell width.
double cells_outside(const std::vector<double>& axis, double v) {
    const std::size_t n = axis.size();
    if (v > axis.back()) return (v - axis.back()) / (axis[n - 1] - axis[n - 2]);
    if (v < axis.front()) return (axis.front() - v) / (axis[1] - axis[0]);
    return 0.0;
}

void check_surface(const LoadSurface& s, std::size_t n, const char* name) {
    const auto bad = [&](const std::vector<double>& v) { return v.size() != n; };
    if (bad(s.thrust_ratio) || bad(s.thrust_std) || bad(s.pitch_ratio) || bad(s.pitch_std)) {
        fail(ErrorKind::shape, std::string(name) + " load surface does not match the grid axes");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double t = s.thrust_ratio[i];
        if (!(t > 0.0 && t <= 1.2)) {
            fail(ErrorKind::data, std::string(name) + " thrust ratio " + std::to_string(t) +
                                      " outside (0, 1.2] at node " + std::to_string(i));
        }
        if (!(s.thrust_std[i] >= 0.0) || !(s.pitch_std[i] >= 0.0)) {
            fail(ErrorKind::data, std::string(name) + " negative or non-finite std at node " +
                                      std::to_string(i));
        }
        if (!std::isfinite(s.pitch_ratio[i]) || !std::isfinite(s.thrust_std[i]) ||
            !std::isfinite(s.pitch_std[i])) {
            fail(ErrorKind::data, std::string(name) + " non-finite load at node " + std::to_string(i));
        }
    }
}

// Marching squares on the node grid. Points on a shared edge are computed
// from the same node pair in the same order, so neighbouring cells agree
// bit for bit and segments chain by exact comparison.
using Segment = std::pair<Point, Point>;

Point edge_point(const LoadGrid& g, const std::vector<double>& f, double level, std::size_t iz0,
                 std::size_t ix0, std::size_t iz1, std::size_t ix1) {
    const double a = f[g.index(iz0, ix0)];
    const double b = f[g.index(iz1, ix1)];
    const double t = (level - a) / (b - a);
    return {g.dx[ix0] + t * (g.dx[ix1] - g.dx[ix0]), g.dz[iz0] + t * (g.dz[iz1] - g.dz[iz0])};
}

std::vector<Segment> march(const LoadGrid& g, const std::vector<double>& f, double level) {
    std::vector<Segment> out;
    for (std::size_t iz = 0; iz + 1 < g.ndz(); ++iz) {
        for (std::size_t ix = 0; ix + 1 < g.ndx(); ++ix) {
            const double v0 = f[g.index(iz, ix)];
            const double v1 = f[g.index(iz, ix + 1)];
            const double v2 = f[g.index(iz + 1, ix + 1)];
            const double v3 = f[g.index(iz + 1, ix)];
            const int code = (v0 >= level ? 1 : 0) | (v1 >= level ? 2 : 0) |
                             (v2 >= level ? 4 : 0) | (v3 >= level ? 8 : 0);
            if (code == 0 || code == 15) continue;
            // Edges: bottom (0-1), right (1-2), top (3-2), left (0-3).
            const auto bottom = [&] { return edge_point(g, f, level, iz, ix, iz, ix + 1); };
            const auto right = [&] { return edge_point(g, f, level, iz, ix + 1, iz + 1, ix + 1); };
            const auto top = [&] { return edge_point(g, f, level, iz + 1, ix, iz + 1, ix + 1); };
            const auto left = [&] { return edge_point(g, f, level, iz, ix, iz + 1, ix); };
            const bool center_high = 0.25 * (v0 + v1 + v2 + v3) >= level;
            switch (code) {
                case 1: case 14: out.push_back({left(), bottom()}); break;
                case 2: case 13: out.push_back({bottom(), right()}); break;
                case 3: case 12: out.push_back({left(), right()}); break;
                case 4: case 11: out.push_back({right(), top()}); break;
                case 6: case 9: out.push_back({bottom(), top()}); break;
                case 7: case 8: out.push_back({left(), top()}); break;
                case 5:
                    if (center_high) {
                        out.push_back({left(), top()});
                        out.push_back({bottom(), right()});
                    } else {
                        out.push_back({left(), bottom()});
                        out.push_back({right(), top()});
                    }
                    break;
                case 10:
                    if (center_high) {
                        out.push_back({left(), bottom()});
                        out.push_back({right(), top()});
                    } else {
                        out.push_back({left(), top()});
                        out.push_back({bottom(), right()});
                    }
                    break;
                default: break;
            }
        }
    }
    return out;
}

bool same_point(const Point& a, const Point& b) noexcept { return a.x == b.x && a.z == b.z; }

std::vector<std::vector<Point>> chain(const std::vector<Segment>& segs) {
    using Key = std::pair<double, double>;
    std::multimap<Key, std::size_t> ends;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        ends.insert({{segs[i].first.x, segs[i].first.z}, i});
        ends.insert({{segs[i].second.x, segs[i].second.z}, i});
    }
    std::vector<bool> used(segs.size(), false);
    const auto next_from = [&](const Point& p) -> long {
        auto [lo, hi] = ends.equal_range({p.x, p.z});
        for (auto it = lo; it != hi; ++it) {
            if (!used[it->second]) return static_cast<long>(it->second);
        }
        return -1;
    };
    const auto extend = [&](std::vector<Point>& line) {
        for (;;) {
            const long k = next_from(line.back());
            if (k < 0) return;
            used[static_cast<std::size_t>(k)] = true;
            const Segment& s = segs[static_cast<std::size_t>(k)];
            line.push_back(same_point(s.first, line.back()) ? s.second : s.first);
        }
    };
    std::vector<std::vector<Point>> lines;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        std::vector<Point> line{segs[i].first, segs[i].second};
        extend(line);
        std::reverse(line.begin(), line.end());
        extend(line);
        lines.push_back(std::move(line));
    }
    return lines;
}

InteractionEnvelope envelope(const LoadGrid& grid, const std::vector<double>& f, double level,
                             const char* what) {
    const std::vector<std::vector<Point>> lines = chain(march(grid, f, level));
    if (lines.empty()) {
        fail(ErrorKind::degenerate, std::string(what) + " never crosses " + std::to_string(level));
    }
    InteractionEnvelope env;
    env.threshold = level;
    env.contours = lines;
    double s40 = 0.0, s22 = 0.0, s04 = 0.0, s20 = 0.0, s02 = 0.0;
    for (const auto& line : lines) {
        for (const Point& p : line) {
            env.lateral_extent = std::max(env.lateral_extent, std::fabs(p.x));
            env.axial_extent = std::max(env.axial_extent, p.z);
            const double x2 = p.x * p.x;
            const double z2 = p.z * p.z;
            s40 += x2 * x2;
            s22 += x2 * z2;
            s04 += z2 * z2;
            s20 += x2;
            s02 += z2;
        }
    }
    const double det = s40 * s04 - s22 * s22;
    const double p = (s20 * s04 - s02 * s22) / det;
    const double q = (s40 * s02 - s22 * s20) / det;
    if (!(det > 0.0) || !(p > 0.0) || !(q > 0.0)) {
        fail(ErrorKind::degenerate, std::string(what) + " contour does not fit an ellipse");
    }
    env.a_lateral = 1.0 / std::sqrt(p);
    env.b_axial = 1.0 / std::sqrt(q);
    return env;
}

void require_queryable(const LoadGrid& grid) {
    require(!grid.empty(), ErrorKind::state, "load grid is empty");
    require(grid.ndx() >= 2 && grid.ndz() >= 2, ErrorKind::state,
            "load grid needs at least two nodes per axis");
}

double simpson(double lo, double hi, int n, auto&& f) {
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    return s * h / 3.0;
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

std::string_view to_string(Vehicle v) noexcept { return v == Vehicle::upper ? "upper" : "lower"; }

Vehicle parse_vehicle(std::string_view text) {
    if (text == "upper") return Vehicle::upper;
    if (text == "lower") return Vehicle::lower;
    fail(ErrorKind::config, "unknown vehicle '" + std::string(text) + "' (expected upper|lower)");
}

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::measured_node: return "measured-node";
        case Provenance::interpolated: return "interpolated";
        case Provenance::asymptotic: return "asymptotic";
    }
    return "asymptotic";
}

void LoadGrid::validate() const {
    require(!empty(), ErrorKind::state, "load grid is empty");
    require(strictly_increasing(dx), ErrorKind::shape, "load grid dx axis is not strictly increasing");
    require(strictly_increasing(dz), ErrorKind::shape, "load grid dz axis is not strictly increasing");
    require(trial_count >= 1, ErrorKind::data, "trial count must be >= 1");
    check_surface(upper, size(), "upper");
    check_surface(lower, size(), "lower");
}

LoadSample query_loads(const LoadGrid& grid, Vehicle vehicle, double dx, double dz,
                       OutOfRange policy) {
    require_queryable(grid);
    require(std::isfinite(dx) && std::isfinite(dz), ErrorKind::argument,
            "load query separation must be finite");
    LoadSample s;
    s.vehicle = vehicle;
    s.dx = dx;
    s.dz = dz;
    double pitch_sign = 1.0;
    double qx = dx;
    if (qx < 0.0 && grid.dx.front() == 0.0) {
        qx = -qx;
        pitch_sign = -1.0;
    }
    const LoadSurface& f = grid.surface(vehicle);
    const double out = std::max(cells_outside(grid.dx, qx), cells_outside(grid.dz, dz));
    if (out > 0.0) {
        if (policy == OutOfRange::error) {
            fail(ErrorKind::range, "separation (" + std::to_string(dx) + ", " + std::to_string(dz) +
                                       ") outside the load grid");
        }
        if (policy == OutOfRange::asymptotic && out >= 1.0) {
            s.provenance = Provenance::asymptotic;
            return s;
        }
    }
    const double cx_v = std::clamp(qx, grid.dx.front(), grid.dx.back());
    const double cz_v = std::clamp(dz, grid.dz.front(), grid.dz.back());
    const auto ix = std::find(grid.dx.begin(), grid.dx.end(), cx_v);
    const auto iz = std::find(grid.dz.begin(), grid.dz.end(), cz_v);
    if (ix != grid.dx.end() && iz != grid.dz.end()) {
        const std::size_t k = grid.index(static_cast<std::size_t>(iz - grid.dz.begin()),
                                         static_cast<std::size_t>(ix - grid.dx.begin()));
        s.thrust_ratio = f.thrust_ratio[k];
        s.thrust_std = f.thrust_std[k];
        s.pitch_ratio = pitch_sign * f.pitch_ratio[k];
        s.pitch_std = f.pitch_std[k];
        s.provenance = Provenance::measured_node;
    } else {
        const Cell cx = locate(grid.dx, cx_v);
        const Cell cz = locate(grid.dz, cz_v);
        s.thrust_ratio = bilinear(f.thrust_ratio, grid, cx, cz);
        s.thrust_std = bilinear(f.thrust_std, grid, cx, cz);
        s.pitch_ratio = pitch_sign * bilinear(f.pitch_ratio, grid, cx, cz);
        s.pitch_std = bilinear(f.pitch_std, grid, cx, cz);
        s.provenance = Provenance::interpolated;
    }
    if (out > 0.0) {
        s.clamped = policy == OutOfRange::clamp;
        s.provenance = Provenance::interpolated;
        if (policy == OutOfRange::asymptotic) {
            const double w = smoothstep(out);
            s.thrust_ratio += w * (1.0 - s.thrust_ratio);
            s.thrust_std -= w * s.thrust_std;
            s.pitch_ratio -= w * s.pitch_ratio;
            s.pitch_std -= w * s.pitch_std;
        }
    }
    return s;
}

InteractionEnvelope influence_envelope(const LoadGrid& grid, Vehicle vehicle, double threshold) {
    require(threshold > 0.5 && threshold < 1.0, ErrorKind::argument,
            "influence threshold must lie in (0.5, 1)");
    require_queryable(grid);
    return envelope(grid, grid.surface(vehicle).thrust_ratio, threshold, "thrust ratio");
}

InteractionEnvelope unsteadiness_envelope(const LoadGrid& grid, Vehicle vehicle,
                                          double std_threshold) {
    require_queryable(grid);
    const std::vector<double>& f = grid.surface(vehicle).thrust_std;
    const double peak = *std::max_element(f.begin(), f.end());
    require(peak > 0.0, ErrorKind::degenerate, "thrust std is zero everywhere");
    const double level = std_threshold > 0.0 ? std_threshold : 0.05 * peak;
    return envelope(grid, f, level, "thrust std");
}

std::vector<PitchPeak> peak_pitch_offset(const LoadGrid& grid, Vehicle vehicle) {
    require(!grid.empty(), ErrorKind::state, "load grid is empty");
    require(grid.dx.front() <= 2.0 && grid.dx.back() >= 2.0, ErrorKind::range,
            "load grid does not span dx/l = 2");
    const LoadSurface& f = grid.surface(vehicle);
    std::vector<PitchPeak> out;
    for (std::size_t iz = 0; iz < grid.ndz(); ++iz) {
        PitchPeak p{grid.dz[iz], grid.dx[0], f.pitch_ratio[grid.index(iz, 0)]};
        for (std::size_t ix = 1; ix < grid.ndx(); ++ix) {
            const double m = f.pitch_ratio[grid.index(iz, ix)];
            if (std::fabs(m) > std::fabs(p.pitch_ratio)) p = {grid.dz[iz], grid.dx[ix], m};
        }
        out.push_back(p);
    }
    return out;
}

DeficitModel::DeficitModel(const JetScaling& scaling, const VehicleGeometry& geom, double gain)
    : scaling_(scaling), gain_(gain) {
    scaling.validate();
    geom.validate();
    require(std::isfinite(gain), ErrorKind::domain, "deficit gain must be finite");
    if (scaling.length_unit == LengthUnit::arm_lengths) {
        arm_ = 1.0;
        radius_ = geom.rotor_radius_m / geom.arm_length_m;
    } else {
        arm_ = geom.arm_length_m;
        radius_ = geom.rotor_radius_m;
    }
}

DeficitModel DeficitModel::calibrate(const JetScaling& scaling, const VehicleGeometry& geom,
                                     const LoadGrid& grid, Vehicle vehicle) {
    grid.validate();
    DeficitModel m(scaling, geom);
    const auto x0 = std::find(grid.dx.begin(), grid.dx.end(), 0.0);
    require(x0 != grid.dx.end(), ErrorKind::range, "load grid has no dx = 0 column to calibrate on");
    const double zm = scaling.merge_point / m.arm_;
    const auto z0 = std::upper_bound(grid.dz.begin(), grid.dz.end(), zm);
    require(z0 != grid.dz.end(), ErrorKind::range, "load grid has no node past the merge point");
    const std::size_t k = grid.index(static_cast<std::size_t>(z0 - grid.dz.begin()),
                                     static_cast<std::size_t>(x0 - grid.dx.begin()));
    const double flux = m.incident_flux(0.0, *z0);
    require(flux > 0.0, ErrorKind::degenerate, "calibration node sees no incident flux");
    m.gain_ = (1.0 - grid.surface(vehicle).thrust_ratio[k]) / flux;
    m.cal_dx_ = 0.0;
    m.cal_dz_ = *z0;
    return m;
}

double DeficitModel::incident_flux(double dx, double dz) const {
    const double z = dz * arm_;
    const double x = dx * arm_;
    const auto u2 = [&](double xi) {
        const double u = axial_profile(scaling_, z, xi);
        return u * u;
    };
    return simpson(x - arm_ - radius_, x - arm_ + radius_, 64, u2) +
           simpson(x + arm_ - radius_, x + arm_ + radius_, 64, u2);
}

double DeficitModel::predict(double dx, double dz) const {
    if (!(dz * arm_ > scaling_.merge_point)) {
        fail(ErrorKind::validity, "momentum deficit estimate needs dz/l past the merge point, got " +
                                      std::to_string(dz));
    }
    return 1.0 - gain_ * incident_flux(dx, dz);
}

double momentum_deficit_estimate(const DeficitModel& model, double dx, double dz) {
    return model.predict(dx, dz);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size() && a.size() >= 2, ErrorKind::argument,
            "spearman needs two equal-length samples");
    const std::vector<double> ra = ranks(a);
    const std::vector<double> rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - mean) * (rb[i] - mean);
        saa += (ra[i] - mean) * (ra[i] - mean);
        sbb += (rb[i] - mean) * (rb[i] - mean);
    }
    require(saa > 0.0 && sbb > 0.0, ErrorKind::degenerate, "spearman input has no rank spread");
    return sab / std::sqrt(saa * sbb);
}

double deficit_rank_correlation(const DeficitModel& model, const LoadGrid& grid, Vehicle vehicle) {
    grid.validate();
    std::vector<double> pred, meas;
    const LoadSurface& f = grid.surface(vehicle);
    for (std::size_t iz = 0; iz < grid.ndz(); ++iz) {
        for (std::size_t ix = 0; ix < grid.ndx(); ++ix) {
            try {
                pred.push_back(model.predict(grid.dx[ix], grid.dz[iz]));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::validity) throw;
                continue;
            }
            meas.push_back(f.thrust_ratio[grid.index(iz, ix)]);
        }
    }
    return spearman(pred, meas);
}

LoadGrid anchored_synthetic_grid() {
    LoadGrid g;
    for (int i = 0; i <= 16; ++i) g.dx.push_back(0.5 * i);
    for (int i = 3; i <= 34; ++i) g.dz.push_back(static_cast<double>(i));
    const std::size_t n = g.size();
    for (LoadSurface* s : {&g.upper, &g.lower}) {
        s->thrust_ratio.resize(n);
        s->thrust_std.resize(n);
        s->pitch_ratio.resize(n);
        s->pitch_std.resize(n);
    }
    // Thrust deficit well: elliptical Gaussian whose 0.98 contour passes
    // through (3, 0) and (0, 19); depth sets 0.65 / 0.90 at (0, 4).
    const double ax = 1.755;
    const double bz2 = 120.5;
    // Unsteadiness: 5 % contour at dx 4.5 and dz 17, measured from the
    // closest row dz = 3.
    const double sx = 2.6;
    const double sz = 8.088;
    const double pitch_peak = 0.25;
    const double pitch_decay = 10.0;
    for (std::size_t iz = 0; iz < g.ndz(); ++iz) {
        for (std::size_t ix = 0; ix < g.ndx(); ++ix) {
            const double x = g.dx[ix];
            const double z = g.dz[iz];
            const std::size_t k = g.index(iz, ix);
            const double well = std::exp(-((x / ax) * (x / ax) + z * z / bz2));
            const double unsteady = std::exp(-((x / sx) * (x / sx) + ((z - 3.0) / sz) * ((z - 3.0) / sz)));
            // x/2 exp((1 - x^2/4)/2) peaks at 1 for x = 2.
            const double arm = 0.5 * x * std::exp(0.5 * (1.0 - 0.25 * x * x));
            const double fade = std::exp(-((z - 3.0) / pitch_decay) * ((z - 3.0) / pitch_decay));
            g.lower.thrust_ratio[k] = 1.0 - 0.3997 * well;
            g.upper.thrust_ratio[k] = 1.0 - 0.1142 * well;
            g.lower.thrust_std[k] = 0.08 * unsteady;
            g.upper.thrust_std[k] = 0.0008 * unsteady;
            g.lower.pitch_ratio[k] = -pitch_peak * arm * fade;
            g.upper.pitch_ratio[k] = -pitch_peak / 3.0 * arm * fade;
            g.lower.pitch_std[k] = 0.03 * arm * fade;
            g.upper.pitch_std[k] = 0.0003 * arm * fade;
        }
    }
    g.trial_count = 1;
    return g;
}

}  // namespace downwash
