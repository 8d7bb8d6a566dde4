#include "downwash/scaling_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "downwash/error.hpp"

namespace downwash {
namespace {

constexpr double kVarianceFloor = 1e-12;

void check_lengths(std::size_t nz, std::size_t nv, std::size_t nw, const char* what) {
    if (nv != nz || (nw != 0 && nw != nz)) {
        fail(ErrorKind::shape, std::string(what) + " arrays have unequal lengths");
    }
    if (nz < 2) fail(ErrorKind::fit, std::string(what) + " needs at least two samples");
}

void check_weights(const std::vector<double>& w) {
    for (double x : w) {
        require(std::isfinite(x) && x > 0.0, ErrorKind::domain, "fit weights must be positive");
    }
}

// Sample order is canonicalized before any summation.
struct Sample {
    double z, y, w;
};

std::vector<Sample> sorted_samples(const std::vector<double>& z, const std::vector<double>& y,
                                   const std::vector<double>& w) {
    std::vector<Sample> s(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) s[i] = {z[i], y[i], w.empty() ? 1.0 : w[i]};
    std::sort(s.begin(), s.end(), [](const Sample& a, const Sample& b) {
        return std::tie(a.z, a.y, a.w) < std::tie(b.z, b.y, b.w);
    });
    return s;
}

double mean_square(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s / static_cast<double>(v.size());
}

struct Profiled {
    std::vector<Sample> g;  // (z, r_half, w)
    std::vector<Sample> d;  // (z, u_c, w)
    double u0;
    SeriesWeights lambda;

    double spread(double z0) const {
        double a = 0.0, b = 0.0;
        for (const Sample& s : g) {
            const double dz = s.z - z0;
            a += s.w * s.y * dz;
            b += s.w * dz * dz;
        }
        return a / b;
    }

    double decay_product(double z0) const {
        double c = 0.0, e = 0.0;
        for (const Sample& s : d) {
            const double p = u0 / (s.z - z0);
            c += s.w * s.y * p;
            e += s.w * p * p;
        }
        return c / e;
    }

    double objective(double z0) const {
        const double S = spread(z0);
        const double B = decay_product(z0);
        double jg = 0.0, jd = 0.0;
        for (const Sample& s : g) {
            const double r = s.y - S * (s.z - z0);
            jg += s.w * r * r;
        }
        for (const Sample& s : d) {
            const double r = s.y - u0 * B / (s.z - z0);
            jd += s.w * r * r;
        }
        return lambda.growth * jg + lambda.decay * jd;
    }

    double derivative(double z0) const {
        double a = 0.0, da = 0.0, b = 0.0, db = 0.0;
        for (const Sample& s : g) {
            const double dz = s.z - z0;
            a += s.w * s.y * dz;
            da -= s.w * s.y;
            b += s.w * dz * dz;
            db -= 2.0 * s.w * dz;
        }
        double c = 0.0, dc = 0.0, e = 0.0, de = 0.0;
        for (const Sample& s : d) {
            const double q = 1.0 / (s.z - z0);
            const double p = u0 * q;
            c += s.w * s.y * p;
            dc += s.w * s.y * u0 * q * q;
            e += s.w * p * p;
            de += 2.0 * s.w * u0 * u0 * q * q * q;
        }
        const double jg = -2.0 * a * da / b + a * a * db / (b * b);
        const double jd = -2.0 * c * dc / e + c * c * de / (e * e);
        return lambda.growth * jg + lambda.decay * jd;
    }
};

double golden_section(const Profiled& p, double a, double b, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = p.objective(c);
    double fd = p.objective(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = p.objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = p.objective(d);
        }
    }
    return 0.5 * (a + b);
}

// Sharpens a golden-section estimate to the root of the analytic derivative.
double polish(const Profiled& p, double x, double delta, double cap) {
    double lo = x - delta;
    double hi = std::min(x + delta, cap);
    double flo = p.derivative(lo);
    const double fhi = p.derivative(hi);
    if (!(flo < 0.0 && fhi > 0.0)) return x;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = p.derivative(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void GrowthSeries::validate() const {
    check_lengths(z.size(), r_half.size(), weights.size(), "growth series");
    check_weights(weights);
    for (std::size_t i = 0; i < z.size(); ++i) {
        require(std::isfinite(z[i]) && std::isfinite(r_half[i]), ErrorKind::data,
                "growth series contains non-finite values");
        require(r_half[i] > 0.0, ErrorKind::domain, "growth series half-widths must be positive");
    }
}

void DecaySeries::validate() const {
    check_lengths(z.size(), u_c.size(), weights.size(), "decay series");
    check_weights(weights);
    for (std::size_t i = 0; i < z.size(); ++i) {
        require(std::isfinite(z[i]) && std::isfinite(u_c[i]), ErrorKind::data,
                "decay series contains non-finite values");
        if (!(u_c[i] > 0.0)) {
            fail(ErrorKind::domain, "centerline velocity must be positive, got " +
                                        std::to_string(u_c[i]) + " at z=" + std::to_string(z[i]));
        }
    }
}

GrowthSeries restrict_range(const GrowthSeries& s, const FitRange& range) {
    GrowthSeries out;
    for (std::size_t i = 0; i < s.z.size(); ++i) {
        if (s.z[i] < range.lo || s.z[i] > range.hi) continue;
        out.z.push_back(s.z[i]);
        out.r_half.push_back(s.r_half[i]);
        if (!s.weights.empty()) out.weights.push_back(s.weights[i]);
    }
    return out;
}

DecaySeries restrict_range(const DecaySeries& s, const FitRange& range) {
    DecaySeries out;
    for (std::size_t i = 0; i < s.z.size(); ++i) {
        if (s.z[i] < range.lo || s.z[i] > range.hi) continue;
        out.z.push_back(s.z[i]);
        out.u_c.push_back(s.u_c[i]);
        if (!s.weights.empty()) out.weights.push_back(s.weights[i]);
    }
    return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& w) {
    check_lengths(x.size(), y.size(), w.size(), "regression");
    check_weights(w);
    const std::vector<Sample> s = sorted_samples(x, y, w);
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (const Sample& p : s) {
        sw += p.w;
        sx += p.w * p.z;
        sy += p.w * p.y;
    }
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (const Sample& p : s) {
        sxx += p.w * (p.z - mx) * (p.z - mx);
        sxy += p.w * (p.z - mx) * (p.y - my);
    }
    if (!(sxx > 0.0) || s.front().z == s.back().z) {
        fail(ErrorKind::fit, "regression is rank-deficient: all abscissae are equal");
    }
    LineFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    return out;
}

GrowthFit fit_half_width_growth(const GrowthSeries& series) {
    series.validate();
    const LineFit line = fit_line(series.z, series.r_half, series.weights);
    require(line.slope > 0.0, ErrorKind::fit, "half-width does not grow with z");
    GrowthFit out;
    out.spread_rate = line.slope;
    out.virtual_origin = -line.intercept / line.slope;
    double ss = 0.0;
    for (const Sample& s : sorted_samples(series.z, series.r_half, {})) {
        const double r = s.y - (line.slope * s.z + line.intercept);
        ss += r * r;
    }
    out.residual_rms = std::sqrt(ss / static_cast<double>(series.z.size()));
    return out;
}

DecayFit fit_centerline_decay(const DecaySeries& series, double u0) {
    series.validate();
    require(u0 > 0.0 && std::isfinite(u0), ErrorKind::domain, "u0 must be positive");
    std::vector<double> inv(series.u_c.size());
    for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / series.u_c[i];
    const LineFit line = fit_line(inv, series.z, series.weights);
    require(line.slope > 0.0, ErrorKind::fit, "centerline velocity does not decay with z");
    DecayFit out;
    out.decay_product = line.slope / u0;
    out.virtual_origin = line.intercept;
    double ss = 0.0;
    for (const Sample& s : sorted_samples(series.z, series.u_c, {})) {
        const double r = s.y - line.slope / (s.z - line.intercept);
        ss += r * r;
    }
    out.residual_rms = std::sqrt(ss / static_cast<double>(series.z.size()));
    return out;
}

SeriesWeights inverse_variance_weights(const GrowthSeries& growth, const DecaySeries& decay,
                                       double u0) {
    const GrowthFit g = fit_half_width_growth(growth);
    const DecayFit d = fit_centerline_decay(decay, u0);
    SeriesWeights w;
    w.growth = 1.0 / (g.residual_rms * g.residual_rms + kVarianceFloor * mean_square(growth.r_half));
    w.decay = 1.0 / (d.residual_rms * d.residual_rms + kVarianceFloor * mean_square(decay.u_c));
    return w;
}

double profiled_objective(const GrowthSeries& growth, const DecaySeries& decay, double u0,
                          double z0, const SeriesWeights& weights) {
    growth.validate();
    decay.validate();
    const double zmin = std::min(*std::min_element(growth.z.begin(), growth.z.end()),
                                 *std::min_element(decay.z.begin(), decay.z.end()));
    require(z0 < zmin, ErrorKind::domain, "virtual origin must lie upstream of every station");
    const Profiled p{sorted_samples(growth.z, growth.r_half, growth.weights),
                     sorted_samples(decay.z, decay.u_c, decay.weights), u0, weights};
    return p.objective(z0);
}

FitResult joint_fit(const GrowthSeries& growth_in, const DecaySeries& decay_in, double u0,
                    const JointFitOptions& opts) {
    require(u0 > 0.0 && std::isfinite(u0), ErrorKind::domain, "u0 must be positive");
    const GrowthSeries growth = opts.restrict_to_range ? restrict_range(growth_in, opts.range) : growth_in;
    const DecaySeries decay = opts.restrict_to_range ? restrict_range(decay_in, opts.range) : decay_in;
    growth.validate();
    decay.validate();

    const GrowthFit g = fit_half_width_growth(growth);
    const DecayFit d = fit_centerline_decay(decay, u0);

    FitResult out;
    out.z0_growth = g.virtual_origin;
    out.z0_decay = d.virtual_origin;
    out.weights = opts.inverse_variance ? inverse_variance_weights(growth, decay, u0) : SeriesWeights{};
    const auto [gmin, gmax] = std::minmax_element(growth.z.begin(), growth.z.end());
    const auto [dmin, dmax] = std::minmax_element(decay.z.begin(), decay.z.end());
    const double zlo = std::min(*gmin, *dmin);
    const double zhi = std::max(*gmax, *dmax);
    out.fit_range = opts.restrict_to_range ? opts.range : FitRange{zlo, zhi};

    const Profiled p{sorted_samples(growth.z, growth.r_half, growth.weights),
                     sorted_samples(decay.z, decay.u_c, decay.weights), u0, out.weights};

    const double scale = 1.0 + std::fabs(zlo) + std::fabs(zhi - zlo);
    const double cap = zlo - 1e-6 * scale;
    const double seed_lo = std::min(g.virtual_origin, d.virtual_origin);
    const double seed_hi = std::max(g.virtual_origin, d.virtual_origin);
    const double width = std::max(seed_hi - seed_lo, 1e-3 * scale);
    double a = std::min(seed_lo - width, cap - width);
    double b = std::min(seed_hi + width, cap);
    const double tol = 1e-9 * scale;

    double z0 = 0.0;
    bool found = false;
    for (int expand = 0; expand < 30 && !found; ++expand) {
        z0 = golden_section(p, a, b, tol);
        if (z0 - a <= 2.0 * tol) {
            a -= 2.0 * (b - a);
        } else if (b - z0 <= 2.0 * tol) {
            if (b >= cap) break;
            b = std::min(b + 2.0 * (b - a), cap);
        } else {
            found = true;
        }
    }
    if (found) {
        z0 = polish(p, z0, 8.0 * tol, cap);
    } else {
        z0 = 0.5 * (g.virtual_origin + d.virtual_origin);
        out.z0_fallback = true;
        require(z0 < zlo, ErrorKind::fit, "joint fit failed and the seed average is not upstream");
    }

    out.scaling = opts.base;
    out.scaling.virtual_origin = z0;
    out.scaling.spread_rate = p.spread(z0);
    out.scaling.decay_product = p.decay_product(z0);
    out.scaling.initial_velocity = u0;

    double sg = 0.0;
    for (const Sample& s : p.g) {
        const double r = s.y - out.scaling.spread_rate * (s.z - z0);
        sg += r * r;
    }
    double sd = 0.0;
    for (const Sample& s : p.d) {
        const double r = s.y - u0 * out.scaling.decay_product / (s.z - z0);
        sd += r * r;
    }
    out.residual_growth = std::sqrt(sg / static_cast<double>(p.g.size()));
    out.residual_decay = std::sqrt(sd / static_cast<double>(p.d.size()));
    return out;
}

}  // namespace downwash
