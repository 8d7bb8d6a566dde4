// Least-squares recovery of the far-field jet parameters from measured
// half-width growth and centerline decay series.
#pragma once

#include <vector>

#include "downwash/jet_model.hpp"

namespace downwash {

struct GrowthSeries {
    std::vector<double> z;
    std::vector<double> r_half;
    std::vector<double> weights;  // empty = unweighted

    void validate() const;
};

struct DecaySeries {
    std::vector<double> z;
    std::vector<double> u_c;
    std::vector<double> weights;  // empty = unweighted

    void validate() const;
};

/// Inclusive z window applied before fitting.
struct FitRange {
    double lo = 7.0;
    double hi = 12.0;
};

GrowthSeries restrict_range(const GrowthSeries& s, const FitRange& range);
DecaySeries restrict_range(const DecaySeries& s, const FitRange& range);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Weighted least-squares line y = slope x + intercept. The result does not
/// depend on sample order. Throws Error(fit) when x has no spread.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& w = {});

struct GrowthFit {
    double spread_rate = 0.0;
    double virtual_origin = 0.0;
    double residual_rms = 0.0;  // in r_half units
};

struct DecayFit {
    double decay_product = 0.0;
    double virtual_origin = 0.0;
    double residual_rms = 0.0;  // in u_c units
};

/// r_1/2 = S (z - z0) by regression of r_1/2 on z.
GrowthFit fit_half_width_growth(const GrowthSeries& series);

/// u_c = u0 Bd / (z - z0) by regression of z on 1 / u_c.
DecayFit fit_centerline_decay(const DecaySeries& series, double u0);

/// Relative weights of the two series in the joint objective.
struct SeriesWeights {
    double growth = 1.0;
    double decay = 1.0;
};

/// Inverse residual variance of each independent fit, with a floor of
/// 1e-12 times the series' mean square so exact data stay finite.
SeriesWeights inverse_variance_weights(const GrowthSeries& growth, const DecaySeries& decay,
                                       double u0);

/// Combined weighted sum of squares with S and Bd eliminated for a given z0.
double profiled_objective(const GrowthSeries& growth, const DecaySeries& decay, double u0,
                          double z0, const SeriesWeights& weights);

struct FitResult {
    JetScaling scaling;
    double residual_growth = 0.0;
    double residual_decay = 0.0;
    double z0_growth = 0.0;   // independent estimates used to seed the search
    double z0_decay = 0.0;
    SeriesWeights weights;
    FitRange fit_range;
    bool z0_fallback = false;  // true when the search failed and z0 is the seed average
};

struct JointFitOptions {
    FitRange range;
    bool restrict_to_range = false;
    bool inverse_variance = true;
    /// Supplies merge point and unit convention of the result.
    JetScaling base;
};

/// Shared-z0 fit of both series: 1-D golden-section search over z0 on the
/// profiled objective, seeded by the independent fits.
FitResult joint_fit(const GrowthSeries& growth, const DecaySeries& decay, double u0,
                    const JointFitOptions& opts = {});

}  // namespace downwash
