// Unit conventions for lengths and velocities.
#pragma once

#include <string>
#include <string_view>

namespace downwash {

enum class LengthUnit { meters, arm_lengths };
enum class VelocityUnit { m_per_s, induced_velocity };

std::string_view to_string(LengthUnit unit) noexcept;
std::string_view to_string(VelocityUnit unit) noexcept;

/// Throws Error(config) on unknown names.
LengthUnit parse_length_unit(std::string_view name);
VelocityUnit parse_velocity_unit(std::string_view name);

/// Dimensional scales that connect SI quantities to the normalized frame:
/// lengths in arm lengths, velocities in induced velocity.
struct UnitFrame {
    double arm_length_m = 0.0;
    double induced_velocity_mps = 0.0;

    /// Factor that converts a length expressed in `from` into `to`.
    double length_factor(LengthUnit from, LengthUnit to) const;
    double velocity_factor(VelocityUnit from, VelocityUnit to) const;
};

}  // namespace downwash
