#include "downwash/velocity_field.hpp"

#include <cmath>
#include <string>

#include "downwash/error.hpp"

namespace downwash {

bool strictly_increasing(const std::vector<double>& values) noexcept {
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) return false;
    }
    return true;
}

VelocityField VelocityField::zeros(std::vector<double> x_axis, std::vector<double> z_axis,
                                   LengthUnit lu, VelocityUnit vu) {
    VelocityField f;
    f.x = std::move(x_axis);
    f.z = std::move(z_axis);
    f.u.assign(f.size(), 0.0);
    f.v.assign(f.size(), 0.0);
    f.valid.assign(f.size(), 1);
    f.length_unit = lu;
    f.velocity_unit = vu;
    return f;
}

void VelocityField::validate() const {
    require(!x.empty() && !z.empty(), ErrorKind::shape, "velocity field has an empty axis");
    require(strictly_increasing(x), ErrorKind::shape, "field x axis is not strictly increasing");
    require(strictly_increasing(z), ErrorKind::shape, "field z axis is not strictly increasing");
    const std::size_t n = size();
    if (u.size() != n || v.size() != n || valid.size() != n) {
        fail(ErrorKind::shape, "field arrays do not match axes: expected " + std::to_string(n) +
                                   " nodes, got u=" + std::to_string(u.size()) +
                                   " v=" + std::to_string(v.size()) +
                                   " valid=" + std::to_string(valid.size()));
    }
    require(frame_count >= 1, ErrorKind::data, "field frame_count must be >= 1");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(u[i]) || !std::isfinite(v[i])) {
            fail(ErrorKind::data, "non-finite velocity at node " + std::to_string(i));
        }
    }
}

VelocityProfile VelocityProfile::make(double z, std::vector<double> x, std::vector<double> u,
                                      std::vector<double> v) {
    VelocityProfile p;
    p.z = z;
    p.valid.assign(x.size(), 1);
    p.x = std::move(x);
    p.u = std::move(u);
    p.v = std::move(v);
    return p;
}

void VelocityProfile::validate() const {
    require(!x.empty(), ErrorKind::shape, "empty velocity profile");
    require(u.size() == x.size() && v.size() == x.size() && valid.size() == x.size(),
            ErrorKind::shape, "velocity profile arrays have unequal lengths");
    require(strictly_increasing(x), ErrorKind::shape, "profile x is not strictly increasing");
}

}  // namespace downwash
