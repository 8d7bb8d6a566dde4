// Reduced-order downwash model: actuator-disk induced velocity, far-field
// round-jet scaling laws, self-similar profiles and a near-field two-jet
// closure that cross-fades into the far field at the merge point.
#pragma once

#include <cstddef>

#include "downwash/units.hpp"
#include "downwash/velocity_field.hpp"

namespace downwash {

struct Environment {
    double air_density = 1.225;          // kg/m^3
    double kinematic_viscosity = 1.5e-5;  // m^2/s

    void validate() const;
};

struct VehicleGeometry {
    double arm_length_m = 0.0325;
    double rotor_radius_m = 0.0225;
    int rotor_count = 4;
    double weight_n = 0.265;

    /// Swept area of one rotor, pi r^2.
    double disk_area() const noexcept;
    void validate() const;
};

/// The four-parameter far-field jet model plus its unit convention.
///
/// Lengths (decay_product, virtual_origin, merge_point) share `length_unit`,
/// `initial_velocity` is expressed in `velocity_unit`. Every evaluation
/// takes and returns values in these units.
struct JetScaling {
    double spread_rate = 0.0667;       // S
    double decay_product = 9.508;      // B*d
    double virtual_origin = -6.0585;   // z0
    double merge_point = 6.5;          // z_m
    double initial_velocity = 1.0;     // u0
    LengthUnit length_unit = LengthUnit::arm_lengths;
    VelocityUnit velocity_unit = VelocityUnit::induced_velocity;

    void validate() const;

    /// Same jet expressed in another unit convention.
    JetScaling converted(LengthUnit lu, VelocityUnit vu, const UnitFrame& frame) const;

    friend bool operator==(const JetScaling&, const JetScaling&) = default;
};

/// Region-of-validity policy for the far-field formulas.
enum class FarField {
    strict,          // refuse z <= z_m
    allow_near,      // evaluate anywhere the formula is finite
};

/// Parameters of the near-field closure, all in the scaling's units.
struct NearFieldConfig {
    double rotor_jet_peak = 1.0;          // velocity just below each rotor
    double annulus_inner_fraction = 0.2;  // hub core radius as a fraction of r
    double jet_width_sigma = 0.35;        // initial per-rotor jet width
    double inflow_peak_fraction = 0.2;    // peak inflow above the rotors / rotor_jet_peak
    double blend_window = 1.0;            // cross-fade length centred on z_m

    void validate() const;

    /// Defaults for a vehicle: peak = U_i, width = r/2, window = one arm length.
    static NearFieldConfig defaults(const VehicleGeometry& geom, const Environment& env,
                                    const JetScaling& scaling);
};

struct VelocityPair {
    double u = 0.0;
    double v = 0.0;
};

/// Actuator-disk induced velocity U_i = sqrt(F / (2 rho A n)) in m/s.
double induced_velocity(const VehicleGeometry& geom, const Environment& env, double thrust_n);

/// Normalization frame of a vehicle hovering at its own weight.
UnitFrame hover_frame(const VehicleGeometry& geom, const Environment& env);

/// r_1/2(z) = S (z - z0).
double half_width(const JetScaling& s, double z, FarField check = FarField::strict);

/// u_c(z) = u0 Bd / (z - z0).
double centerline_velocity(const JetScaling& s, double z);

/// Self-similar axial profile u_c / (1 + (sqrt2 - 1) xi^2)^2, xi = |x| / r_1/2.
double axial_profile(const JetScaling& s, double z, double x, FarField check = FarField::strict);

/// Self-similar lateral profile (u_c / 2)(xi - xi^3) / (1 + xi^2)^2 with signed xi.
double lateral_profile(const JetScaling& s, double z, double x, FarField check = FarField::strict);

/// Normalized shapes f(xi) = u/u_c and g(xi) = v/u_c of the two profiles.
double axial_shape(double xi) noexcept;
double lateral_shape(double xi) noexcept;

/// Jet Reynolds number u_c r_1/2 / nu (SI inputs).
double reynolds(double centerline_velocity_mps, double half_width_m, const Environment& env);

/// Composite near/far-field model with its derived constants precomputed.
///
/// Near field: two rotor jets at x = +-l, each a Gaussian whose width grows
/// linearly from jet_width_sigma to the merged jet's Gaussian-equivalent
/// width at z_m, with a hub core that fills in over one hub radius.
/// The amplitude decays geometrically so that the two-jet centerline meets
/// u_c(z_m). Lateral velocity follows from planar continuity. Above the
/// rotor plane (z < 0) each rotor draws a Gaussian inflow tube.
class DownwashModel {
public:
    DownwashModel(const VehicleGeometry& geom, const JetScaling& scaling,
                  const NearFieldConfig& cfg);

    /// Evaluates the composite model at any (x, z); never throws.
    VelocityPair at(double x, double z) const;

    /// Near-field closure alone (no far-field blending), z >= 0.
    VelocityPair jets(double x, double z) const;
    /// Inflow above the rotor plane, z < 0.
    VelocityPair inflow(double x, double z) const;

    /// Smoothstep cross-fade weight of the far-field model at z.
    double blend_weight(double z) const noexcept;

    double blend_start() const noexcept { return blend_lo_; }
    double blend_end() const noexcept { return blend_hi_; }
    double arm_length() const noexcept { return arm_; }
    double rotor_radius() const noexcept { return radius_; }
    const JetScaling& scaling() const noexcept { return scaling_; }
    const NearFieldConfig& config() const noexcept { return cfg_; }

private:
    JetScaling scaling_;
    NearFieldConfig cfg_;
    double arm_ = 0.0;        // l in scaling length units
    double radius_ = 0.0;     // r in scaling length units
    double sigma_merge_ = 0.0;
    double amp_merge_ = 0.0;
    double core_sigma_ = 0.0;
    double inflow_amp_ = 0.0;
    double inflow_height_ = 0.0;
    double blend_lo_ = 0.0;
    double blend_hi_ = 0.0;
};

/// Near-field model with cross-fade into the far field; valid for
/// z <= z_m + blend_window (z < 0 gives the inflow field).
VelocityPair near_field_velocity(const VehicleGeometry& geom, const JetScaling& scaling,
                                 const NearFieldConfig& cfg, double x, double z);

/// Rectilinear sampling grid. Axes include both end points.
struct GridSpec {
    double x_min = -3.0;
    double x_max = 3.0;
    std::size_t nx = 121;
    double z_min = 0.5;
    double z_max = 20.0;
    std::size_t nz = 391;

    std::vector<double> x_axis() const;
    std::vector<double> z_axis() const;
    void validate() const;
};

/// Samples the composite model on a grid (OpenMP over rows when available).
VelocityField evaluate_field(const DownwashModel& model, const GridSpec& grid);

/// Single-threaded reference of evaluate_field, kept for tests and benchmarks.
VelocityField evaluate_field_serial(const DownwashModel& model, const GridSpec& grid);

}  // namespace downwash
