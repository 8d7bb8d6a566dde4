#include "downwash/field_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "downwash/error.hpp"

namespace downwash {
namespace {

constexpr double kMaxMaskedFraction = 0.2;

bool near_equal(double a, double b) noexcept {
    const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) <= 1e-9 * scale;
}

bool same_axis(const std::vector<double>& a, const std::vector<double>& b) noexcept {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!near_equal(a[i], b[i])) return false;
    }
    return true;
}

void check_frames(const std::vector<VelocityField>& frames) {
    require(!frames.empty(), ErrorKind::argument, "time_average needs at least one frame");
    const VelocityField& ref = frames.front();
    ref.validate();
    for (std::size_t k = 1; k < frames.size(); ++k) {
        const VelocityField& f = frames[k];
        f.validate();
        if (!same_axis(f.x, ref.x) || !same_axis(f.z, ref.z)) {
            fail(ErrorKind::shape, "frame " + std::to_string(k) + " axes differ from frame 0");
        }
        if (f.length_unit != ref.length_unit || f.velocity_unit != ref.velocity_unit) {
            fail(ErrorKind::shape, "frame " + std::to_string(k) + " units differ from frame 0");
        }
    }
}

void average_node(const std::vector<VelocityField>& frames, std::size_t i, VelocityField& out) {
    double su = 0.0;
    double sv = 0.0;
    double sw = 0.0;
    for (const VelocityField& f : frames) {
        if (!f.valid[i]) continue;
        const double w = static_cast<double>(f.frame_count);
        su += w * f.u[i];
        sv += w * f.v[i];
        sw += w;
    }
    if (sw > 0.0) {
        out.u[i] = su / sw;
        out.v[i] = sv / sw;
        out.valid[i] = 1;
    } else {
        out.u[i] = 0.0;
        out.v[i] = 0.0;
        out.valid[i] = 0;
    }
}

VelocityField average_shell(const std::vector<VelocityField>& frames) {
    const VelocityField& ref = frames.front();
    VelocityField out = VelocityField::zeros(ref.x, ref.z, ref.length_unit, ref.velocity_unit);
    long total = 0;
    for (const VelocityField& f : frames) total += f.frame_count;
    out.frame_count = total;
    return out;
}

// Row of `f` at height z, linearly interpolated between bracketing rows.
struct Row {
    std::vector<double> u, v;
    std::vector<std::uint8_t> valid;
};

Row sample_row(const VelocityField& f, double z) {
    const std::size_t nx = f.nx();
    Row row{std::vector<double>(nx), std::vector<double>(nx), std::vector<std::uint8_t>(nx)};
    auto hit = std::lower_bound(f.z.begin(), f.z.end(), z);
    std::size_t hi = static_cast<std::size_t>(hit - f.z.begin());
    if (hi < f.nz() && near_equal(f.z[hi], z)) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const std::size_t k = f.index(hi, ix);
            row.u[ix] = f.u[k];
            row.v[ix] = f.v[k];
            row.valid[ix] = f.valid[k];
        }
        return row;
    }
    if (hi > 0 && near_equal(f.z[hi - 1], z)) return sample_row(f, f.z[hi - 1]);
    const std::size_t lo = hi - 1;
    const double t = (z - f.z[lo]) / (f.z[hi] - f.z[lo]);
    for (std::size_t ix = 0; ix < nx; ++ix) {
        const std::size_t a = f.index(lo, ix);
        const std::size_t b = f.index(hi, ix);
        row.u[ix] = f.u[a] + t * (f.u[b] - f.u[a]);
        row.v[ix] = f.v[a] + t * (f.v[b] - f.v[a]);
        row.valid[ix] = f.valid[a] && f.valid[b];
    }
    return row;
}

double lerp(double a, double b, double t) noexcept { return a + t * (b - a); }

}  // namespace

VelocityField time_average(const std::vector<VelocityField>& frames) {
    check_frames(frames);
    VelocityField out = average_shell(frames);
    const long n = static_cast<long>(out.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) average_node(frames, static_cast<std::size_t>(i), out);
    return out;
}

VelocityField time_average_serial(const std::vector<VelocityField>& frames) {
    check_frames(frames);
    VelocityField out = average_shell(frames);
    for (std::size_t i = 0; i < out.size(); ++i) average_node(frames, i, out);
    return out;
}

VelocityField stitch(const std::vector<VelocityField>& sections, const StitchOptions& opts) {
    require(!sections.empty(), ErrorKind::argument, "stitch needs at least one section");
    const VelocityField& first = sections.front();
    for (std::size_t k = 0; k < sections.size(); ++k) {
        const VelocityField& s = sections[k];
        s.validate();
        if (!same_axis(s.x, first.x)) {
            fail(ErrorKind::shape, "section " + std::to_string(k) + " x axis differs from section 0");
        }
        if (s.length_unit != first.length_unit || s.velocity_unit != first.velocity_unit) {
            fail(ErrorKind::shape, "section " + std::to_string(k) + " units differ from section 0");
        }
    }
    for (std::size_t k = 0; k + 1 < sections.size(); ++k) {
        const VelocityField& a = sections[k];
        const VelocityField& b = sections[k + 1];
        const double overlap = a.z.back() - b.z.front();
        const double height = std::min(a.z.back() - a.z.front(), b.z.back() - b.z.front());
        const double needed = opts.min_overlap > 0.0 ? opts.min_overlap : height / 3.0;
        const std::string pair = "sections " + std::to_string(k) + " and " + std::to_string(k + 1);
        if (b.z.front() < a.z.front() || b.z.back() < a.z.back()) {
            fail(ErrorKind::stitch, pair + " are not ordered by z");
        }
        if (overlap < needed * (1.0 - 1e-9)) {
            fail(ErrorKind::stitch, pair + " overlap by " + std::to_string(overlap) +
                                        ", need at least " + std::to_string(needed));
        }
        if (k + 2 < sections.size() && sections[k + 2].z.front() < a.z.back()) {
            fail(ErrorKind::stitch, "sections " + std::to_string(k) + " and " +
                                        std::to_string(k + 2) + " overlap");
        }
    }
    if (sections.size() == 1) return first;

    std::vector<double> zs;
    for (const VelocityField& s : sections) zs.insert(zs.end(), s.z.begin(), s.z.end());
    std::sort(zs.begin(), zs.end());
    std::vector<double> axis;
    for (double z : zs) {
        if (axis.empty() || !near_equal(axis.back(), z)) axis.push_back(z);
    }

    VelocityField out = VelocityField::zeros(first.x, axis, first.length_unit, first.velocity_unit);
    out.frame_count = first.frame_count;
    for (const VelocityField& s : sections) out.frame_count = std::min(out.frame_count, s.frame_count);

    const std::size_t nx = out.nx();
    std::size_t k = 0;
    for (std::size_t iz = 0; iz < axis.size(); ++iz) {
        const double z = axis[iz];
        while (k + 1 < sections.size() && z > sections[k].z.back() &&
               !near_equal(z, sections[k].z.back())) {
            ++k;
        }
        const VelocityField& a = sections[k];
        const bool in_next = k + 1 < sections.size() &&
                             (z >= sections[k + 1].z.front() ||
                              near_equal(z, sections[k + 1].z.front()));
        Row ra = sample_row(a, std::clamp(z, a.z.front(), a.z.back()));
        if (!in_next) {
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const std::size_t i = out.index(iz, ix);
                out.u[i] = ra.u[ix];
                out.v[i] = ra.v[ix];
                out.valid[i] = ra.valid[ix];
            }
            continue;
        }
        const VelocityField& b = sections[k + 1];
        Row rb = sample_row(b, std::clamp(z, b.z.front(), b.z.back()));
        double t = 0.5;
        if (opts.blend == Blend::linear_ramp) {
            const double lo = b.z.front();
            const double hi = a.z.back();
            t = std::clamp((z - lo) / (hi - lo), 0.0, 1.0);
        }
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const std::size_t i = out.index(iz, ix);
            const bool va = ra.valid[ix] != 0;
            const bool vb = rb.valid[ix] != 0;
            if (va && vb) {
                out.u[i] = lerp(ra.u[ix], rb.u[ix], t);
                out.v[i] = lerp(ra.v[ix], rb.v[ix], t);
                out.valid[i] = 1;
            } else if (va || vb) {
                out.u[i] = va ? ra.u[ix] : rb.u[ix];
                out.v[i] = va ? ra.v[ix] : rb.v[ix];
                out.valid[i] = 1;
            } else {
                out.valid[i] = 0;
            }
        }
    }
    return out;
}

VelocityProfile extract_profile(const VelocityField& field, double z, ProfileSampling mode) {
    field.validate();
    if (!(z >= field.z.front() && z <= field.z.back())) {
        fail(ErrorKind::range, "profile station z=" + std::to_string(z) + " outside [" +
                                   std::to_string(field.z.front()) + ", " +
                                   std::to_string(field.z.back()) + "]");
    }
    double station = z;
    if (mode == ProfileSampling::nearest) {
        auto hit = std::lower_bound(field.z.begin(), field.z.end(), z);
        std::size_t hi = static_cast<std::size_t>(hit - field.z.begin());
        if (hi == field.nz()) hi = field.nz() - 1;
        std::size_t best = hi;
        if (hi > 0 && z - field.z[hi - 1] <= field.z[hi] - z) best = hi - 1;
        station = field.z[best];
    }
    Row row = sample_row(field, station);
    std::size_t masked = 0;
    for (std::uint8_t ok : row.valid) masked += ok ? 0 : 1;
    if (static_cast<double>(masked) > kMaxMaskedFraction * static_cast<double>(row.valid.size())) {
        fail(ErrorKind::data, "profile at z=" + std::to_string(station) + " has " +
                                  std::to_string(masked) + " of " +
                                  std::to_string(row.valid.size()) + " nodes masked");
    }
    VelocityProfile p;
    p.z = station;
    p.x = field.x;
    p.u = std::move(row.u);
    p.v = std::move(row.v);
    p.valid = std::move(row.valid);
    return p;
}

CenterlineMax centerline_and_max(const VelocityProfile& profile) {
    profile.validate();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (profile.valid[i]) idx.push_back(i);
    }
    require(!idx.empty(), ErrorKind::data, "profile has no valid samples");
    const double xa = profile.x[idx.front()];
    const double xb = profile.x[idx.back()];
    if (!(xa <= 0.0 && xb >= 0.0)) {
        fail(ErrorKind::range, "profile at z=" + std::to_string(profile.z) +
                                   " does not span x = 0");
    }
    CenterlineMax out;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const std::size_t i = idx[j];
        if (profile.x[i] == 0.0) {
            out.u_c = profile.u[i];
            break;
        }
        if (j + 1 < idx.size() && profile.x[i] < 0.0 && profile.x[idx[j + 1]] > 0.0) {
            const std::size_t n = idx[j + 1];
            const double t = -profile.x[i] / (profile.x[n] - profile.x[i]);
            out.u_c = lerp(profile.u[i], profile.u[n], t);
            break;
        }
    }
    out.u_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i : idx) {
        const double u = profile.u[i];
        if (u > out.u_max ||
            (u == out.u_max && std::fabs(profile.x[i]) < std::fabs(out.x_at_max))) {
            out.u_max = u;
            out.x_at_max = profile.x[i];
        }
    }
    return out;
}

double detect_merge_point(const VelocityField& field, double eps, int window) {
    require(eps > 0.0 && eps < 0.2, ErrorKind::argument, "merge tolerance must lie in (0, 0.2)");
    require(window >= 1, ErrorKind::argument, "merge window must be >= 1");
    field.validate();
    double min_gap = std::numeric_limits<double>::infinity();
    int run = 0;
    std::size_t run_start = 0;
    for (std::size_t iz = 0; iz < field.nz(); ++iz) {
        double gap = std::numeric_limits<double>::infinity();
        try {
            const CenterlineMax cm =
                centerline_and_max(extract_profile(field, field.z[iz], ProfileSampling::nearest));
            if (cm.u_max > 0.0) gap = (cm.u_max - cm.u_c) / cm.u_max;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::data && e.kind() != ErrorKind::range) throw;
        }
        min_gap = std::min(min_gap, gap);
        if (gap < eps) {
            if (run == 0) run_start = iz;
            if (++run >= window) return field.z[run_start];
        } else {
            run = 0;
        }
    }
    throw NotMergedError("jets never merge: smallest relative gap " + std::to_string(min_gap) +
                             " vs tolerance " + std::to_string(eps),
                         min_gap);
}

double half_width_from_profile(const VelocityProfile& profile, double slope_tolerance) {
    profile.validate();
    std::vector<double> x, u;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (!profile.valid[i]) continue;
        x.push_back(profile.x[i]);
        u.push_back(profile.u[i]);
    }
    require(x.size() >= 3, ErrorKind::data, "profile has fewer than 3 valid samples");
    const std::size_t peak = static_cast<std::size_t>(std::max_element(u.begin(), u.end()) - u.begin());
    const double u_max = u[peak];
    require(u_max > 0.0, ErrorKind::validity, "profile peak is not positive");
    const double tol = slope_tolerance * u_max;

    double run_min = u_max;
    for (std::size_t i = peak; i-- > 0;) {
        if (u[i] > run_min + tol) {
            fail(ErrorKind::validity, "profile at z=" + std::to_string(profile.z) +
                                          " is multimodal; half-width undefined");
        }
        run_min = std::min(run_min, u[i]);
    }
    run_min = u_max;
    for (std::size_t i = peak + 1; i < u.size(); ++i) {
        if (u[i] > run_min + tol) {
            fail(ErrorKind::validity, "profile at z=" + std::to_string(profile.z) +
                                          " is multimodal; half-width undefined");
        }
        run_min = std::min(run_min, u[i]);
    }

    const double half = 0.5 * u_max;
    auto crossing = [&](std::size_t a, std::size_t b) {
        const double t = (u[a] - half) / (u[a] - u[b]);
        return x[a] + t * (x[b] - x[a]);
    };
    double right = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = peak; i + 1 < u.size(); ++i) {
        if (u[i + 1] <= half) {
            right = crossing(i, i + 1);
            break;
        }
    }
    double left = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = peak; i > 0; --i) {
        if (u[i - 1] <= half) {
            left = crossing(i, i - 1);
            break;
        }
    }
    if (std::isnan(left) || std::isnan(right)) {
        fail(ErrorKind::range, "profile at z=" + std::to_string(profile.z) +
                                   " has no half-maximum crossing on both sides");
    }
    return 0.5 * (right - left);
}

CollapseReport similarity_collapse(const std::vector<VelocityProfile>& profiles,
                                   const JetScaling& scaling, const CollapseOptions& opts) {
    scaling.validate();
    require(!profiles.empty(), ErrorKind::argument, "similarity_collapse needs profiles");
    require(opts.xi_max > 0.0, ErrorKind::argument, "xi_max must be positive");
    const FarField check = opts.allow_pre_merge ? FarField::allow_near : FarField::strict;
    CollapseReport report;
    double sa = 0.0;
    double sl = 0.0;
    std::size_t n = 0;
    for (const VelocityProfile& p : profiles) {
        p.validate();
        if (!opts.allow_pre_merge && !(p.z > scaling.merge_point)) {
            fail(ErrorKind::validity, "collapse station z=" + std::to_string(p.z) +
                                          " is not past the merge point");
        }
        const double r = half_width(scaling, p.z, check);
        const double uc = centerline_velocity(scaling, p.z);
        ScaledProfile sp;
        sp.z = p.z;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!p.valid[i]) continue;
            const double xi = p.x[i] / r;
            if (std::fabs(xi) > opts.xi_max) continue;
            const double us = p.u[i] / uc;
            const double vs = p.v[i] / uc;
            sp.xi.push_back(xi);
            sp.u_scaled.push_back(us);
            sp.v_scaled.push_back(vs);
            const double da = us - axial_shape(xi);
            const double dl = vs - lateral_shape(xi);
            sa += da * da;
            sl += dl * dl;
            ++n;
        }
        report.stations.push_back(p.z);
        report.scaled_profiles.push_back(std::move(sp));
    }
    require(n > 0, ErrorKind::data, "no samples within the collapse window");
    report.rms_residual_axial = std::sqrt(sa / static_cast<double>(n));
    report.rms_residual_lateral = std::sqrt(sl / static_cast<double>(n));
    return report;
}

std::vector<double> downwash_speed(const VelocityField& field) {
    std::vector<double> out(field.size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (field.valid.empty() || field.valid[i]) out[i] = std::hypot(field.u[i], field.v[i]);
    }
    return out;
}

}  // namespace downwash
