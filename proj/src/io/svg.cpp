#include "downwash/io/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "downwash/field_analysis.hpp"
#include "downwash/io/files.hpp"

namespace downwash::io {
namespace {

// Perceptually ordered ramp, dark blue through teal to yellow.
constexpr std::array<std::array<double, 3>, 5> ramp{{
    {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37},
}};

std::string color(double t) {
    t = std::clamp(t, 0.0, 1.0) * (ramp.size() - 1);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), ramp.size() - 2);
    const double f = t - static_cast<double>(i);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(ramp[i][c] + f * (ramp[i + 1][c] - ramp[i][c])));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

// Cell edges halfway between nodes, extended by half a step at the ends.
std::vector<double> edges(const std::vector<double>& axis) {
    std::vector<double> e(axis.size() + 1);
    if (axis.size() == 1) {
        e[0] = axis[0] - 0.5;
        e[1] = axis[0] + 0.5;
        return e;
    }
    for (std::size_t i = 1; i < axis.size(); ++i) e[i] = 0.5 * (axis[i - 1] + axis[i]);
    e.front() = axis.front() - (e[1] - axis.front());
    e.back() = axis.back() + (axis.back() - e[axis.size() - 1]);
    return e;
}

}  // namespace

std::string field_heatmap_svg(const VelocityField& field, double pixels_per_unit) {
    field.validate();
    const std::vector<double> speed = downwash_speed(field);
    double vmax = 0.0;
    for (double s : speed) vmax = std::max(vmax, s);
    const std::vector<double> ex = edges(field.x), ez = edges(field.z);
    const double k = pixels_per_unit;
    const double width = (ex.back() - ex.front()) * k, height = (ez.back() - ez.front()) * k;

    std::string out = "<!-- downwash-heatmap v1 -->\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) + "\" height=\"" +
           format_double(height) + "\" viewBox=\"0 0 " + format_double(width) + " " + format_double(height) +
           "\" shape-rendering=\"crispEdges\">\n";
    out += "<desc>downwash speed, max " + format_double(vmax) + " " +
           std::string(to_string(field.velocity_unit)) + "</desc>\n";
    for (std::size_t iz = 0; iz < field.nz(); ++iz) {
        for (std::size_t ix = 0; ix < field.nx(); ++ix) {
            const std::size_t n = field.index(iz, ix);
            const std::string fill = field.valid[n] ? color(vmax > 0.0 ? speed[n] / vmax : 0.0) : "#808080";
            out += "<rect x=\"" + format_double((ex[ix] - ex.front()) * k) + "\" y=\"" +
                   format_double((ez[iz] - ez.front()) * k) + "\" width=\"" +
                   format_double((ex[ix + 1] - ex[ix]) * k) + "\" height=\"" +
                   format_double((ez[iz + 1] - ez[iz]) * k) + "\" fill=\"" + fill + "\"/>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace downwash::io
