// Processing of gridded mean velocity fields: averaging, stitching,
// slicing, merge detection, half-width measurement and collapse checks.
#pragma once

#include <cstddef>
#include <vector>

#include "downwash/jet_model.hpp"
#include "downwash/velocity_field.hpp"

namespace downwash {

/// Frame-count weighted mean of fields on identical axes. Masked nodes are
/// left out of the mean; a node stays masked only if every input masks it.
VelocityField time_average(const std::vector<VelocityField>& frames);
VelocityField time_average_serial(const std::vector<VelocityField>& frames);

enum class Blend { average, linear_ramp };

struct StitchOptions {
    Blend blend = Blend::linear_ramp;
    /// Minimum z overlap between consecutive sections. Non-positive selects
    /// one third of the smaller section height.
    double min_overlap = 0.0;
};

/// Joins sections ordered by z into one composite on the union of their
/// z nodes. Overlaps are blended pairwise; elsewhere rows are copied.
VelocityField stitch(const std::vector<VelocityField>& sections, const StitchOptions& opts = {});

enum class ProfileSampling { nearest, interpolate };

/// Lateral slice at z. Rejects slices with more than 20 % masked nodes.
VelocityProfile extract_profile(const VelocityField& field, double z,
                                ProfileSampling mode = ProfileSampling::interpolate);

struct CenterlineMax {
    double u_c = 0.0;
    double u_max = 0.0;
    double x_at_max = 0.0;
};

/// u at x = 0 and the profile maximum; ties go to the smallest |x|.
CenterlineMax centerline_and_max(const VelocityProfile& profile);

/// Smallest z station where (u_max - u_c) / u_max < eps holds for `window`
/// consecutive stations. Throws NotMergedError otherwise.
double detect_merge_point(const VelocityField& field, double eps = 0.02, int window = 3);

/// Half-width from the half-maximum crossings on both sides of the peak.
/// `slope_tolerance` (fraction of u_max) is the rise allowed away from the
/// peak before the profile counts as multimodal.
double half_width_from_profile(const VelocityProfile& profile, double slope_tolerance = 0.02);

struct ScaledProfile {
    double z = 0.0;
    std::vector<double> xi;
    std::vector<double> u_scaled;
    std::vector<double> v_scaled;
};

/// Residuals are RMS deviations of u/u_c and v/u_c from the similarity
/// shapes, i.e. fractions of the local centerline velocity.
struct CollapseReport {
    std::vector<double> stations;
    double rms_residual_axial = 0.0;
    double rms_residual_lateral = 0.0;
    std::vector<ScaledProfile> scaled_profiles;
};

struct CollapseOptions {
    double xi_max = 2.0;
    bool allow_pre_merge = false;
};

/// Rescales each profile by the model's u_c(z) and r_1/2(z).
CollapseReport similarity_collapse(const std::vector<VelocityProfile>& profiles,
                                   const JetScaling& scaling, const CollapseOptions& opts = {});

/// Node-wise sqrt(u^2 + v^2); masked nodes give 0.
std::vector<double> downwash_speed(const VelocityField& field);

}  // namespace downwash
