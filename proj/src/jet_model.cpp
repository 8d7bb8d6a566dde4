#include "downwash/jet_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "downwash/error.hpp"

namespace downwash {
namespace {

constexpr double kAxialShapeCoeff = std::numbers::sqrt2 - 1.0;

// Gaussian-equivalent width of the self-similar profile: same half-width.
const double kHalfWidthToSigma = 1.0 / std::sqrt(2.0 * std::numbers::ln2);

double smoothstep(double t) noexcept {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

// Antiderivative in x of d/dz [c(z) exp(-d^2 / (2 w(z)^2))], with d = x - xc.
double continuity_primitive(double d, double c, double dc, double w, double dw) {
    const double s = d / w;
    const double p = std::sqrt(std::numbers::pi / 2.0) * std::erf(s / std::numbers::sqrt2);
    return dc * w * p + c * dw * (p - s * std::exp(-0.5 * s * s));
}

}  // namespace

void Environment::validate() const {
    require(air_density > 0.0 && std::isfinite(air_density), ErrorKind::domain,
            "air density must be positive");
    require(kinematic_viscosity > 0.0 && std::isfinite(kinematic_viscosity), ErrorKind::domain,
            "kinematic viscosity must be positive");
}

double VehicleGeometry::disk_area() const noexcept {
    return std::numbers::pi * rotor_radius_m * rotor_radius_m;
}

void VehicleGeometry::validate() const {
    require(arm_length_m > 0.0, ErrorKind::domain, "arm length must be positive");
    require(rotor_radius_m > 0.0, ErrorKind::domain, "rotor radius must be positive");
    require(rotor_count >= 1, ErrorKind::domain, "rotor count must be >= 1");
    require(weight_n > 0.0, ErrorKind::domain, "vehicle weight must be positive");
}

void JetScaling::validate() const {
    require(spread_rate > 0.0, ErrorKind::domain, "spread rate S must be positive");
    require(decay_product > 0.0, ErrorKind::domain, "decay product Bd must be positive");
    require(merge_point > 0.0, ErrorKind::domain, "merge point must be positive");
    require(virtual_origin < merge_point, ErrorKind::domain,
            "virtual origin must lie upstream of the merge point");
    require(initial_velocity > 0.0, ErrorKind::domain, "initial jet velocity must be positive");
}

JetScaling JetScaling::converted(LengthUnit lu, VelocityUnit vu, const UnitFrame& frame) const {
    JetScaling out = *this;
    const double kl = frame.length_factor(length_unit, lu);
    const double kv = frame.velocity_factor(velocity_unit, vu);
    out.decay_product *= kl;
    out.virtual_origin *= kl;
    out.merge_point *= kl;
    out.initial_velocity *= kv;
    out.length_unit = lu;
    out.velocity_unit = vu;
    return out;
}

void NearFieldConfig::validate() const {
    require(rotor_jet_peak > 0.0, ErrorKind::domain, "rotor jet peak must be positive");
    require(annulus_inner_fraction >= 0.0 && annulus_inner_fraction < 1.0, ErrorKind::domain,
            "annulus inner fraction must lie in [0, 1)");
    require(jet_width_sigma > 0.0, ErrorKind::domain, "jet width sigma must be positive");
    require(inflow_peak_fraction > 0.0 && inflow_peak_fraction < 1.0, ErrorKind::domain,
            "inflow peak fraction must lie in (0, 1)");
    require(blend_window > 0.0, ErrorKind::domain, "blend window must be positive");
}

NearFieldConfig NearFieldConfig::defaults(const VehicleGeometry& geom, const Environment& env,
                                          const JetScaling& scaling) {
    const UnitFrame frame = hover_frame(geom, env);
    const double to_len = frame.length_factor(LengthUnit::meters, scaling.length_unit);
    NearFieldConfig cfg;
    cfg.rotor_jet_peak =
        frame.induced_velocity_mps *
        frame.velocity_factor(VelocityUnit::m_per_s, scaling.velocity_unit);
    cfg.jet_width_sigma = 0.5 * geom.rotor_radius_m * to_len;
    cfg.blend_window = geom.arm_length_m * to_len;
    return cfg;
}

double induced_velocity(const VehicleGeometry& geom, const Environment& env, double thrust_n) {
    require(thrust_n > 0.0, ErrorKind::domain, "thrust must be positive");
    geom.validate();
    env.validate();
    return std::sqrt(thrust_n / (2.0 * env.air_density * geom.disk_area() * geom.rotor_count));
}

UnitFrame hover_frame(const VehicleGeometry& geom, const Environment& env) {
    return UnitFrame{geom.arm_length_m, induced_velocity(geom, env, geom.weight_n)};
}

double half_width(const JetScaling& s, double z, FarField check) {
    if (check == FarField::strict && !(z > s.merge_point)) {
        fail(ErrorKind::validity, "half-width requested at z=" + std::to_string(z) +
                                      " inside the merge point z_m=" +
                                      std::to_string(s.merge_point));
    }
    if (z < s.virtual_origin) {
        fail(ErrorKind::validity, "half-width requested upstream of the virtual origin");
    }
    return s.spread_rate * (z - s.virtual_origin);
}

double centerline_velocity(const JetScaling& s, double z) {
    if (!(z > s.virtual_origin)) {
        fail(ErrorKind::validity, "centerline velocity is singular at or above the virtual origin");
    }
    return s.initial_velocity * s.decay_product / (z - s.virtual_origin);
}

double axial_shape(double xi) noexcept {
    const double q = 1.0 + kAxialShapeCoeff * xi * xi;
    return 1.0 / (q * q);
}

double lateral_shape(double xi) noexcept {
    const double q = 1.0 + xi * xi;
    return 0.5 * (xi - xi * xi * xi) / (q * q);
}

double axial_profile(const JetScaling& s, double z, double x, FarField check) {
    const double rh = half_width(s, z, check);
    const double uc = centerline_velocity(s, z);
    return uc * axial_shape(std::abs(x) / rh);
}

double lateral_profile(const JetScaling& s, double z, double x, FarField check) {
    const double rh = half_width(s, z, check);
    const double uc = centerline_velocity(s, z);
    return uc * lateral_shape(x / rh);
}

double reynolds(double centerline_velocity_mps, double half_width_m, const Environment& env) {
    require(env.kinematic_viscosity > 0.0, ErrorKind::domain, "viscosity must be positive");
    require(centerline_velocity_mps > 0.0 && half_width_m > 0.0, ErrorKind::domain,
            "Reynolds number needs positive velocity and length");
    return centerline_velocity_mps * half_width_m / env.kinematic_viscosity;
}

DownwashModel::DownwashModel(const VehicleGeometry& geom, const JetScaling& scaling,
                             const NearFieldConfig& cfg)
    : scaling_(scaling), cfg_(cfg) {
    geom.validate();
    scaling_.validate();
    cfg_.validate();
    const double to_len =
        UnitFrame{geom.arm_length_m, 0.0}.length_factor(LengthUnit::meters, scaling.length_unit);
    arm_ = geom.arm_length_m * to_len;
    radius_ = geom.rotor_radius_m * to_len;

    const double zm = scaling_.merge_point;
    require(zm - 0.5 * cfg_.blend_window > scaling_.virtual_origin, ErrorKind::domain,
            "blend window reaches upstream of the virtual origin");
    sigma_merge_ = half_width(scaling_, zm, FarField::allow_near) * kHalfWidthToSigma;
    amp_merge_ = centerline_velocity(scaling_, zm) /
                 (2.0 * std::exp(-arm_ * arm_ / (2.0 * sigma_merge_ * sigma_merge_)));
    core_sigma_ = cfg_.annulus_inner_fraction * radius_;

    // Inflow amplitude so that the peak above either rotor, partner
    // included, equals the requested fraction of the jet peak.
    const double partner = std::exp(-2.0 * arm_ * arm_ /
                                    (cfg_.jet_width_sigma * cfg_.jet_width_sigma));
    inflow_amp_ = cfg_.inflow_peak_fraction * cfg_.rotor_jet_peak / (1.0 + partner);
    inflow_height_ = 2.0 * radius_;

    blend_lo_ = zm - 0.5 * cfg_.blend_window;
    blend_hi_ = zm + 0.5 * cfg_.blend_window;
}

double DownwashModel::blend_weight(double z) const noexcept {
    return smoothstep((z - blend_lo_) / cfg_.blend_window);
}

VelocityPair DownwashModel::jets(double x, double z) const {
    const double zm = scaling_.merge_point;
    const double sigma0 = cfg_.jet_width_sigma;
    const double dsigma = (sigma_merge_ - sigma0) / zm;
    const double sigma = sigma0 + dsigma * z;

    const double log_ratio = std::log(amp_merge_ / cfg_.rotor_jet_peak);
    const double amp = cfg_.rotor_jet_peak * std::exp(log_ratio * z / zm);
    const double damp = amp * log_ratio / zm;

    const bool has_core = core_sigma_ > 0.0;
    const double depth = has_core ? std::exp(-z / core_sigma_) : 0.0;
    const double w_core =
        has_core ? 1.0 / std::sqrt(1.0 / (sigma * sigma) + 1.0 / (core_sigma_ * core_sigma_))
                 : 0.0;
    const double c_core = -amp * depth;

    VelocityPair out;
    for (const double xc : {-arm_, arm_}) {
        const double d = x - xc;
        out.u += amp * std::exp(-d * d / (2.0 * sigma * sigma));
        const double flux = continuity_primitive(d, amp, damp, sigma, dsigma) -
                      continuity_primitive(-xc, amp, damp, sigma, dsigma);
        // The hub core fills in from the surrounding annulus; it carries no
        // net lateral flux, so only the outer jet enters the continuity term.
        if (has_core) out.u += c_core * std::exp(-d * d / (2.0 * w_core * w_core));
        out.v -= flux;
    }
    return out;
}

VelocityPair DownwashModel::inflow(double x, double z) const {
    // Gaussian inflow tubes that accelerate toward the disk over one rotor
    // diameter; v closes planar continuity, so air is drawn in from the sides.
    const double sigma = cfg_.jet_width_sigma;
    const double amp = inflow_amp_ * std::exp(z / inflow_height_);
    const double damp = amp / inflow_height_;
    VelocityPair out;
    for (const double xc : {-arm_, arm_}) {
        const double d = x - xc;
        out.u += amp * std::exp(-d * d / (2.0 * sigma * sigma));
        out.v -= continuity_primitive(d, amp, damp, sigma, 0.0) -
                 continuity_primitive(-xc, amp, damp, sigma, 0.0);
    }
    return out;
}

VelocityPair DownwashModel::at(double x, double z) const {
    if (z < 0.0) return inflow(x, z);
    const double w = blend_weight(z);
    if (w >= 1.0) {
        return {axial_profile(scaling_, z, x, FarField::allow_near),
                lateral_profile(scaling_, z, x, FarField::allow_near)};
    }
    const VelocityPair near = jets(x, z);
    if (w <= 0.0) return near;
    const double uf = axial_profile(scaling_, z, x, FarField::allow_near);
    const double vf = lateral_profile(scaling_, z, x, FarField::allow_near);
    return {near.u + w * (uf - near.u), near.v + w * (vf - near.v)};
}

VelocityPair near_field_velocity(const VehicleGeometry& geom, const JetScaling& scaling,
                                 const NearFieldConfig& cfg, double x, double z) {
    const DownwashModel model(geom, scaling, cfg);
    if (z > scaling.merge_point + cfg.blend_window) {
        fail(ErrorKind::validity, "near-field model requested beyond z_m + blend_window");
    }
    return model.at(x, z);
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
    out[n - 1] = hi;
    return out;
}

}  // namespace

std::vector<double> GridSpec::x_axis() const { return linspace(x_min, x_max, nx); }
std::vector<double> GridSpec::z_axis() const { return linspace(z_min, z_max, nz); }

void GridSpec::validate() const {
    require(nx >= 1 && nz >= 1, ErrorKind::argument, "grid must have at least one node per axis");
    require(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(z_min) &&
                std::isfinite(z_max),
            ErrorKind::argument, "grid bounds must be finite");
    require(nx == 1 ? x_min == x_max : x_max > x_min, ErrorKind::argument,
            "grid x range must be increasing (or a single point)");
    require(nz == 1 ? z_min == z_max : z_max > z_min, ErrorKind::argument,
            "grid z range must be increasing (or a single point)");
}

VelocityField evaluate_field_serial(const DownwashModel& model, const GridSpec& grid) {
    grid.validate();
    VelocityField f = VelocityField::zeros(grid.x_axis(), grid.z_axis(),
                                           model.scaling().length_unit,
                                           model.scaling().velocity_unit);
    for (std::size_t iz = 0; iz < f.nz(); ++iz) {
        for (std::size_t ix = 0; ix < f.nx(); ++ix) {
            const VelocityPair p = model.at(f.x[ix], f.z[iz]);
            f.u[f.index(iz, ix)] = p.u;
            f.v[f.index(iz, ix)] = p.v;
        }
    }
    return f;
}

VelocityField evaluate_field(const DownwashModel& model, const GridSpec& grid) {
    grid.validate();
    VelocityField f = VelocityField::zeros(grid.x_axis(), grid.z_axis(),
                                           model.scaling().length_unit,
                                           model.scaling().velocity_unit);
    const auto nz = static_cast<long>(f.nz());
    const std::size_t nx = f.nx();
    // DownwashModel::at never throws: the far field is only reached past
    // blend_start(), which the constructor keeps downstream of z0.
#pragma omp parallel for schedule(static)
    for (long iz = 0; iz < nz; ++iz) {
        const auto row = static_cast<std::size_t>(iz);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const VelocityPair p = model.at(f.x[ix], f.z[row]);
            f.u[row * nx + ix] = p.u;
            f.v[row * nx + ix] = p.v;
        }
    }
    return f;
}

}  // namespace downwash
