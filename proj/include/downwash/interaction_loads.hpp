// Interaction force/moment surfaces over (dx/l, dz/l) for a vehicle pair:
// interpolated queries, influence envelopes and a jet-momentum cross-check.
#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "downwash/jet_model.hpp"

namespace downwash {

enum class Vehicle { upper, lower };

std::string_view to_string(Vehicle v) noexcept;
Vehicle parse_vehicle(std::string_view text);

/// Four load channels of one vehicle, row-major over (dz, dx):
/// element (iz, ix) lives at iz * ndx + ix.
struct LoadSurface {
    std::vector<double> thrust_ratio;  // mean F_z / W
    std::vector<double> thrust_std;    // F'_z / W
    std::vector<double> pitch_ratio;   // mean M_y / (W l)
    std::vector<double> pitch_std;     // M'_y / (W l)

    friend bool operator==(const LoadSurface&, const LoadSurface&) = default;
};

struct LoadGrid {
    std::vector<double> dx;  // arm lengths
    std::vector<double> dz;  // arm lengths
    LoadSurface upper;
    LoadSurface lower;
    long trial_count = 1;
    double sampling_rate_hz = 20000.0;
    double duration_s = 30.0;

    std::size_t ndx() const noexcept { return dx.size(); }
    std::size_t ndz() const noexcept { return dz.size(); }
    std::size_t size() const noexcept { return dx.size() * dz.size(); }
    std::size_t index(std::size_t iz, std::size_t ix) const noexcept { return iz * dx.size() + ix; }
    bool empty() const noexcept { return dx.empty() || dz.empty(); }

    const LoadSurface& surface(Vehicle v) const noexcept { return v == Vehicle::upper ? upper : lower; }
    LoadSurface& surface(Vehicle v) noexcept { return v == Vehicle::upper ? upper : lower; }

    /// Axis monotonicity, shapes, thrust ratios in (0, 1.2], stds >= 0.
    void validate() const;

    friend bool operator==(const LoadGrid&, const LoadGrid&) = default;
};

enum class Provenance { measured_node, interpolated, asymptotic };

std::string_view to_string(Provenance p) noexcept;

struct LoadSample {
    double thrust_ratio = 1.0;
    double thrust_std = 0.0;
    double pitch_ratio = 0.0;
    double pitch_std = 0.0;
    Vehicle vehicle = Vehicle::lower;
    double dx = 0.0;
    double dz = 0.0;
    Provenance provenance = Provenance::asymptotic;
    bool clamped = false;  // set when the query was moved onto the grid edge
};

/// Handling of queries outside the measured rectangle.
enum class OutOfRange {
    asymptotic,  // blend to (1, 0, 0, 0) over one cell width
    clamp,       // use the nearest edge value
    error,       // throw Error(range)
};

/// Bilinear lookup. Negative dx on a grid starting at dx = 0 is mirrored
/// (thrust and stds even, pitch odd).
LoadSample query_loads(const LoadGrid& grid, Vehicle vehicle, double dx, double dz,
                       OutOfRange policy = OutOfRange::asymptotic);

struct Point {
    double x = 0.0;
    double z = 0.0;
};

struct InteractionEnvelope {
    double threshold = 0.0;
    std::vector<std::vector<Point>> contours;  // chained marching-squares polylines
    double lateral_extent = 0.0;               // max |dx| on the contour
    double axial_extent = 0.0;                 // max dz on the contour
    double a_lateral = 0.0;                    // semi-axes of x^2/a^2 + z^2/b^2 = 1
    double b_axial = 0.0;
};

/// Contour of thrust_ratio = threshold, threshold in (0.5, 1).
InteractionEnvelope influence_envelope(const LoadGrid& grid, Vehicle vehicle,
                                       double threshold = 0.98);

/// Contour of thrust_std = std_threshold. A non-positive threshold selects
/// 5 % of the surface's largest standard deviation.
InteractionEnvelope unsteadiness_envelope(const LoadGrid& grid, Vehicle vehicle,
                                          double std_threshold = 0.0);

struct PitchPeak {
    double dz = 0.0;
    double dx = 0.0;
    double pitch_ratio = 0.0;
};

/// Per dz row, the dx of the largest |pitch_ratio| (ties toward smaller dx).
std::vector<PitchPeak> peak_pitch_offset(const LoadGrid& grid, Vehicle vehicle);

/// Thrust deficit predicted from the far-field jet: the squared axial
/// velocity integrated over the lower vehicle's rotor spans, scaled by one
/// gain fixed at a single far-field calibration node.
class DeficitModel {
public:
    DeficitModel(const JetScaling& scaling, const VehicleGeometry& geom, double gain = 1.0);

    /// Gain from the dx = 0 node with the smallest dz past the merge point.
    static DeficitModel calibrate(const JetScaling& scaling, const VehicleGeometry& geom,
                                  const LoadGrid& grid, Vehicle vehicle = Vehicle::lower);

    /// Integrated u^2 over both rotor spans, in scaling units.
    double incident_flux(double dx, double dz) const;
    /// 1 - gain * flux; dx, dz in arm lengths. Throws Error(validity) for dz <= z_m.
    double predict(double dx, double dz) const;

    double gain() const noexcept { return gain_; }
    double calibration_dx() const noexcept { return cal_dx_; }
    double calibration_dz() const noexcept { return cal_dz_; }

private:
    JetScaling scaling_;
    double arm_ = 1.0;     // l in scaling length units
    double radius_ = 0.0;  // r in scaling length units
    double gain_ = 1.0;
    double cal_dx_ = 0.0;
    double cal_dz_ = 0.0;
};

double momentum_deficit_estimate(const DeficitModel& model, double dx, double dz);

/// Spearman rank correlation, average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

/// Spearman correlation of model predictions with the grid's thrust ratios
/// over every node past the merge point.
double deficit_rank_correlation(const DeficitModel& model, const LoadGrid& grid,
                                Vehicle vehicle = Vehicle::lower);

/// Load grid built to reproduce the quoted anchors of the stacked and
/// offset experiments: lower/upper thrust 0.65/0.90 at (0, 4), 0.98 contour
/// at about (3, 19), 5 % unsteadiness contour at about (4.5, 17), peak pitch
/// at dx = 2 with the upper vehicle at one third, upper stds 1/100 of lower.
LoadGrid anchored_synthetic_grid();

}  // namespace downwash
