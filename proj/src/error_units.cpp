#include "downwash/error.hpp"
#include "downwash/units.hpp"

namespace downwash {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::argument: return "argument";
        case ErrorKind::domain: return "domain";
        case ErrorKind::validity: return "validity";
        case ErrorKind::range: return "range";
        case ErrorKind::shape: return "shape";
        case ErrorKind::stitch: return "stitch";
        case ErrorKind::fit: return "fit";
        case ErrorKind::not_merged: return "not-merged";
        case ErrorKind::state: return "state";
        case ErrorKind::degenerate: return "degenerate";
        case ErrorKind::binning: return "binning";
        case ErrorKind::aliasing: return "aliasing";
        case ErrorKind::config: return "config";
        case ErrorKind::data: return "data";
        case ErrorKind::conversion: return "conversion";
    }
    return "unknown";
}

std::string_view to_string(LengthUnit unit) noexcept {
    return unit == LengthUnit::meters ? "meters" : "arm_lengths";
}

std::string_view to_string(VelocityUnit unit) noexcept {
    return unit == VelocityUnit::m_per_s ? "m_per_s" : "induced_velocity";
}

LengthUnit parse_length_unit(std::string_view name) {
    if (name == "meters") return LengthUnit::meters;
    if (name == "arm_lengths") return LengthUnit::arm_lengths;
    fail(ErrorKind::config, "unknown length unit '" + std::string(name) + "'");
}

VelocityUnit parse_velocity_unit(std::string_view name) {
    if (name == "m_per_s") return VelocityUnit::m_per_s;
    if (name == "induced_velocity") return VelocityUnit::induced_velocity;
    fail(ErrorKind::config, "unknown velocity unit '" + std::string(name) + "'");
}

double UnitFrame::length_factor(LengthUnit from, LengthUnit to) const {
    if (from == to) return 1.0;
    require(arm_length_m > 0.0, ErrorKind::domain, "unit frame needs a positive arm length");
    return from == LengthUnit::meters ? 1.0 / arm_length_m : arm_length_m;
}

double UnitFrame::velocity_factor(VelocityUnit from, VelocityUnit to) const {
    if (from == to) return 1.0;
    require(induced_velocity_mps > 0.0, ErrorKind::domain,
            "unit frame needs a positive induced velocity");
    return from == VelocityUnit::m_per_s ? 1.0 / induced_velocity_mps : induced_velocity_mps;
}

}  // namespace downwash
