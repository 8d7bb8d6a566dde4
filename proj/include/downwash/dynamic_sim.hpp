// Dynamic vertical interaction: sinusoidal separation schedule, lagged
// load response, phase averaging and hysteresis-loop metrics.
#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "downwash/interaction_loads.hpp"
#include "downwash/jet_model.hpp"

namespace downwash {

enum class Configuration { stacked, offset };

std::string_view to_string(Configuration c) noexcept;
Configuration parse_configuration(std::string_view text);

/// Lateral offset dx/l of a configuration: 0 stacked, 2 offset.
double configuration_offset(Configuration c) noexcept;

struct DynamicProfile {
    double dz_min_m = 0.05;
    double amplitude_m = 0.05;
    double frequency_hz = 1.0;
    Configuration configuration = Configuration::stacked;
    int ramp_up_cycles = 4;
    int stable_cycles = 40;
    int ramp_down_cycles = 4;
    double sample_rate_hz = 200.0;
    bool extended = false;  // lift the replication-mode parameter ranges

    int total_cycles() const noexcept { return ramp_up_cycles + stable_cycles + ramp_down_cycles; }
    double duration_s() const noexcept { return total_cycles() / frequency_hz; }
    double omega() const noexcept;

    /// Range checks; replication mode also enforces the experimental
    /// envelope dz_min in [0.005, 0.07] m, A in [0.025, 0.09] m, f in [0.1, 1] Hz.
    void validate() const;
};

struct Separation {
    double dz = 0.0;      // m
    double dz_dot = 0.0;  // m/s
};

/// Oscillation phase in [0, 2 pi) at time t.
double phase_at(const DynamicProfile& p, double t);

/// dz = dz_min + a(t) (1 + sin wt) with a(t) ramped linearly during the
/// ramp cycles; dz_dot includes the ramp term.
Separation separation_trajectory(const DynamicProfile& p, double t);

/// Maximum |dz_dot| over the stable cycles, A w.
double peak_rate(const DynamicProfile& p);

/// Response model. The state relaxes toward the quasi-static target with
/// time constant tau(dz); the reported load is target + gain (target - state).
/// gain = -1 reports the lagged state itself.
struct LagModel {
    std::function<double(double dz_m)> tau;  // seconds; empty means zero lag
    double gain = 1.0;
};

/// tau = dz / U_i with U_i the hover induced velocity of `geom`.
LagModel wake_convection_lag(const VehicleGeometry& geom, const Environment& env);

/// Zero lag: the response equals the quasi-static target.
LagModel zero_lag();

struct SimOptions {
    int substeps = 8;  // exact-exponential steps per output sample
    Vehicle vehicle = Vehicle::lower;
};

struct LoadTimeSeries {
    std::vector<double> t;
    std::vector<double> dz;
    std::vector<double> dz_dot;
    std::vector<double> thrust_ratio;
    std::vector<double> pitch_ratio;
    std::vector<double> phase;
    std::vector<int> cycle;
    std::vector<std::uint8_t> clamped;  // 1 where dz was below the grid and held at its edge

    std::size_t size() const noexcept { return t.size(); }
};

/// Samples the full run. Targets come from query_loads at (dx_cfg, dz/l);
/// separations below the grid are clamped to its edge and flagged.
LoadTimeSeries simulate_loads(const LoadGrid& grid, const DynamicProfile& profile,
                              const VehicleGeometry& geom, const LagModel& lag,
                              const SimOptions& opts = {});

/// Samples belonging to the stable cycles only.
LoadTimeSeries stable_portion(const LoadTimeSeries& series, const DynamicProfile& profile);

struct HysteresisLoop {
    std::vector<double> phase_bin_centers;
    std::vector<double> dz_mean;
    std::vector<double> dz_dot_mean;
    std::vector<double> thrust_mean;
    std::vector<double> pitch_mean;
    std::vector<double> thrust_std;
    std::vector<double> pitch_std;
    std::vector<double> weight;  // samples per bin (edge samples count half)
    double loop_area = 0.0;      // closed integral of thrust d(dz), ratio * m
    double asymmetry = 0.0;      // mean thrust retreating - approaching

    std::size_t bins() const noexcept { return phase_bin_centers.size(); }
};

/// Bins samples by phase. A sample on a bin edge counts half in each
/// neighbour. Throws Error(binning) for an empty bin.
HysteresisLoop phase_average(const LoadTimeSeries& series, int bins = 72);

/// Signed area of the closed (dz_mean, thrust_mean) polygon; positive when
/// retreat thrust exceeds approach thrust.
double loop_area(const std::vector<double>& dz, const std::vector<double>& thrust);

struct LoopMetrics {
    double loop_area = 0.0;
    double asymmetry = 0.0;
    double thrust_min = 0.0;
    double thrust_max = 0.0;
    double pitch_min = 0.0;
    double pitch_max = 0.0;
    double pitch_range = 0.0;
    double mean_abs_pitch = 0.0;
    double mean_dz = 0.0;
};

LoopMetrics loop_metrics(const HysteresisLoop& loop);

}  // namespace downwash
