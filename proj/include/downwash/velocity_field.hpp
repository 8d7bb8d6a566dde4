// Gridded mean-flow containers shared by the model and the analysis code.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "downwash/units.hpp"

namespace downwash {

/// Two-dimensional (x, z) mean velocity field.
///
/// `u` is the axial component (positive toward the ground), `v` the lateral
/// component. Both are stored row-major with one row per z station:
/// element (iz, ix) lives at iz * nx() + ix. Masked nodes carry valid == 0
/// and zero velocities so every stored value stays finite.
struct VelocityField {
    std::vector<double> x;
    std::vector<double> z;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<std::uint8_t> valid;
    long frame_count = 1;
    LengthUnit length_unit = LengthUnit::arm_lengths;
    VelocityUnit velocity_unit = VelocityUnit::induced_velocity;

    std::size_t nx() const noexcept { return x.size(); }
    std::size_t nz() const noexcept { return z.size(); }
    std::size_t size() const noexcept { return x.size() * z.size(); }
    std::size_t index(std::size_t iz, std::size_t ix) const noexcept { return iz * x.size() + ix; }

    /// Allocates an all-valid zero field on the given axes.
    static VelocityField zeros(std::vector<double> x_axis, std::vector<double> z_axis,
                               LengthUnit lu = LengthUnit::arm_lengths,
                               VelocityUnit vu = VelocityUnit::induced_velocity);

    /// Checks axis monotonicity, array shapes, finiteness and frame count.
    /// Throws Error(shape) or Error(data).
    void validate() const;

    friend bool operator==(const VelocityField&, const VelocityField&) = default;
};

/// One lateral slice of a field at a fixed downstream station.
struct VelocityProfile {
    double z = 0.0;
    std::vector<double> x;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<std::uint8_t> valid;

    std::size_t size() const noexcept { return x.size(); }

    /// Builds an all-valid profile.
    static VelocityProfile make(double z, std::vector<double> x, std::vector<double> u,
                                std::vector<double> v);

    void validate() const;
};

/// Strictly increasing check shared by the axis validators.
bool strictly_increasing(const std::vector<double>& values) noexcept;

}  // namespace downwash
