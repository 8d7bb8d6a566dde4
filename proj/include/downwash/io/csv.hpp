// Canonical CSV schemas. Every file opens with a `# downwash-<kind> v1`
// line followed by `# key=value` metadata and one column-name row.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "downwash/dynamic_sim.hpp"
#include "downwash/interaction_loads.hpp"
#include "downwash/velocity_field.hpp"

namespace downwash::io {

inline constexpr std::string_view field_schema = "downwash-field v1";
inline constexpr std::string_view loads_schema = "downwash-loads v1";
inline constexpr std::string_view stations_schema = "downwash-stations v1";
inline constexpr std::string_view queries_schema = "downwash-queries v1";
inline constexpr std::string_view timeseries_schema = "downwash-timeseries v1";
inline constexpr std::string_view loop_schema = "downwash-loop v1";

/// Splits CSV text into header metadata and records. Blank lines are
/// skipped; fields are trimmed. Throws Error(data) with line numbers.
struct CsvTable {
    std::string schema;                                      // first comment line, may be empty
    std::vector<std::pair<std::string, std::string>> meta;   // `# key=value` lines in order
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;                      // 1-based source line of each row

    const std::string* find_meta(std::string_view key) const;
    std::size_t column(std::string_view name) const;         // Error(data) when missing
};

CsvTable parse_csv(std::string_view text, std::string_view origin);

std::string write_field_csv(const VelocityField& field);
/// Requires the canonical schema line and a complete rectilinear grid.
VelocityField parse_field_csv(std::string_view text, std::string_view origin = "field csv");
/// Builds a field from scattered (x, z) records; every node must appear once.
VelocityField field_from_records(const std::vector<double>& x, const std::vector<double>& z,
                                 const std::vector<double>& u, const std::vector<double>& v,
                                 const std::vector<std::uint8_t>& valid, std::string_view origin);

std::string write_load_csv(const LoadGrid& grid);
LoadGrid parse_load_csv(std::string_view text, std::string_view origin = "load csv");

/// Per-station summary written by `analyze` and read by `fit`.
struct Station {
    double z = 0.0;
    double u_c = 0.0;
    double u_max = 0.0;
    double x_at_max = 0.0;
    double r_half = 0.0;
    bool has_r_half = false;  // false where the profile is multimodal or has no crossing in the window
    bool merged = false;
};

struct StationTable {
    LengthUnit length_unit = LengthUnit::arm_lengths;
    VelocityUnit velocity_unit = VelocityUnit::induced_velocity;
    double merge_point = 0.0;
    std::vector<Station> stations;
};

std::string write_stations_csv(const StationTable& table);
StationTable parse_stations_csv(std::string_view text, std::string_view origin = "stations csv");

std::string write_query_csv(const std::vector<LoadSample>& samples);
std::string write_timeseries_csv(const LoadTimeSeries& series, double arm_length_m);
std::string write_loop_csv(const HysteresisLoop& loop);

}  // namespace downwash::io
