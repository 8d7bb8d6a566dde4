// Self-contained SVG heatmap of downwash speed.
#pragma once

#include <string>

#include "downwash/velocity_field.hpp"

namespace downwash::io {

/// One rectangle per node colored by |(u, v)|; masked nodes are grey.
/// z grows downward as in the vehicle frame.
std::string field_heatmap_svg(const VelocityField& field, double pixels_per_unit = 40.0);

}  // namespace downwash::io
