#include "downwash/io/csv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "downwash/error.hpp"
#include "downwash/io/files.hpp"

namespace downwash::io {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string at_line(std::string_view origin, std::size_t line) {
    return std::string(origin) + ":" + std::to_string(line) + ": ";
}

void expect_schema(const CsvTable& t, std::string_view schema, std::string_view origin) {
    if (t.schema != schema) {
        fail(ErrorKind::data, std::string(origin) + ": expected schema line '# " + std::string(schema) +
                                  "', found '" + t.schema + "'");
    }
}

std::string required_meta(const CsvTable& t, std::string_view key, std::string_view origin) {
    const std::string* v = t.find_meta(key);
    if (!v) fail(ErrorKind::data, std::string(origin) + ": missing metadata '" + std::string(key) + "'");
    return *v;
}

LengthUnit length_unit_meta(const CsvTable& t, std::string_view origin) {
    const std::string name = required_meta(t, "length_unit", origin);
    try {
        return parse_length_unit(name);
    } catch (const Error& e) {
        fail(ErrorKind::data, std::string(origin) + ": " + e.what());
    }
}

VelocityUnit velocity_unit_meta(const CsvTable& t, std::string_view origin) {
    const std::string name = required_meta(t, "velocity_unit", origin);
    try {
        return parse_velocity_unit(name);
    } catch (const Error& e) {
        fail(ErrorKind::data, std::string(origin) + ": " + e.what());
    }
}

std::uint8_t parse_flag(std::string_view text, std::string_view what) {
    if (text == "1") return 1;
    if (text == "0") return 0;
    fail(ErrorKind::data, "invalid flag '" + std::string(text) + "' for " + std::string(what));
}

void put_header(std::string& out, std::string_view schema) {
    out += "# ";
    out += schema;
    out += '\n';
}

void put_meta(std::string& out, std::string_view key, std::string_view value) {
    out += "# ";
    out += key;
    out += '=';
    out += value;
    out += '\n';
}

void put_row(std::string& out, std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
        if (!first) out += ',';
        out += c;
        first = false;
    }
    out += '\n';
}

std::string num(double v) { return format_double(v); }

/// Sorted distinct values; exact equality since canonical inputs repeat
/// the same text for every node on an axis line.
std::vector<double> axis_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

std::size_t locate(const std::vector<double>& axis, double v) {
    return static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
}

}  // namespace

const std::string* CsvTable::find_meta(std::string_view key) const {
    for (const auto& [k, v] : meta) {
        if (k == key) return &v;
    }
    return nullptr;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    fail(ErrorKind::data, "missing column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text, std::string_view origin) {
    CsvTable t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first_comment = true;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == text.npos ? text.npos : nl - pos);
        pos = nl == text.npos ? text.size() : nl + 1;
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (!t.columns.empty()) {
                fail(ErrorKind::data, at_line(origin, line_no) + "comment after the column row");
            }
            const std::string_view body = trim(line.substr(1));
            const std::size_t eq = body.find('=');
            if (first_comment && eq == body.npos) {
                t.schema = std::string(body);
            } else if (eq != body.npos) {
                t.meta.emplace_back(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
            }
            first_comment = false;
            continue;
        }
        first_comment = false;
        auto cells = split(line);
        if (t.columns.empty()) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i].empty()) fail(ErrorKind::data, at_line(origin, line_no) + "empty column name");
                for (std::size_t j = 0; j < i; ++j) {
                    if (cells[j] == cells[i]) {
                        fail(ErrorKind::data, at_line(origin, line_no) + "duplicate column '" + cells[i] + "'");
                    }
                }
            }
            t.columns = std::move(cells);
            continue;
        }
        if (cells.size() != t.columns.size()) {
            fail(ErrorKind::data, at_line(origin, line_no) + "expected " + std::to_string(t.columns.size()) +
                                      " fields, found " + std::to_string(cells.size()));
        }
        t.rows.push_back(std::move(cells));
        t.row_lines.push_back(line_no);
    }
    if (t.columns.empty()) fail(ErrorKind::data, std::string(origin) + ": no column row");
    return t;
}

std::string write_field_csv(const VelocityField& field) {
    field.validate();
    std::string out;
    put_header(out, field_schema);
    put_meta(out, "length_unit", to_string(field.length_unit));
    put_meta(out, "velocity_unit", to_string(field.velocity_unit));
    put_meta(out, "nx", std::to_string(field.nx()));
    put_meta(out, "nz", std::to_string(field.nz()));
    put_meta(out, "frame_count", std::to_string(field.frame_count));
    out += "x,z,u,v,valid\n";
    for (std::size_t iz = 0; iz < field.nz(); ++iz) {
        for (std::size_t ix = 0; ix < field.nx(); ++ix) {
            const std::size_t k = field.index(iz, ix);
            put_row(out, {num(field.x[ix]), num(field.z[iz]), num(field.u[k]), num(field.v[k]),
                          field.valid[k] ? "1" : "0"});
        }
    }
    return out;
}

VelocityField field_from_records(const std::vector<double>& x, const std::vector<double>& z,
                                 const std::vector<double>& u, const std::vector<double>& v,
                                 const std::vector<std::uint8_t>& valid, std::string_view origin) {
    const std::string where(origin);
    require(!x.empty(), ErrorKind::data, (where + ": no field records").c_str());
    VelocityField f = VelocityField::zeros(axis_of(x), axis_of(z));
    if (f.size() != x.size()) {
        fail(ErrorKind::data, where + ": " + std::to_string(x.size()) + " records do not form a complete " +
                                  std::to_string(f.nx()) + " x " + std::to_string(f.nz()) + " grid");
    }
    std::vector<std::uint8_t> seen(f.size(), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t k = f.index(locate(f.z, z[i]), locate(f.x, x[i]));
        if (seen[k]) {
            fail(ErrorKind::data, where + ": duplicate node at x=" + num(x[i]) + ", z=" + num(z[i]));
        }
        seen[k] = 1;
        f.valid[k] = valid[i];
        f.u[k] = valid[i] ? u[i] : 0.0;
        f.v[k] = valid[i] ? v[i] : 0.0;
    }
    return f;
}

VelocityField parse_field_csv(std::string_view text, std::string_view origin) {
    const CsvTable t = parse_csv(text, origin);
    expect_schema(t, field_schema, origin);
    const std::size_t cx = t.column("x"), cz = t.column("z"), cu = t.column("u"), cv = t.column("v");
    const bool has_valid = std::find(t.columns.begin(), t.columns.end(), "valid") != t.columns.end();
    const std::size_t cm = has_valid ? t.column("valid") : 0;
    std::vector<double> x, z, u, v;
    std::vector<std::uint8_t> valid;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string where = at_line(origin, t.row_lines[r]);
        try {
            x.push_back(parse_double(row[cx], "x"));
            z.push_back(parse_double(row[cz], "z"));
            u.push_back(parse_double(row[cu], "u"));
            v.push_back(parse_double(row[cv], "v"));
            valid.push_back(has_valid ? parse_flag(row[cm], "valid") : 1);
        } catch (const Error& e) {
            fail(ErrorKind::data, where + e.what());
        }
    }
    VelocityField f = field_from_records(x, z, u, v, valid, origin);
    f.length_unit = length_unit_meta(t, origin);
    f.velocity_unit = velocity_unit_meta(t, origin);
    if (const std::string* fc = t.find_meta("frame_count")) f.frame_count = parse_long(*fc, "frame_count");
    if (const std::string* nx = t.find_meta("nx"); nx && parse_long(*nx, "nx") != static_cast<long>(f.nx())) {
        fail(ErrorKind::data, std::string(origin) + ": nx metadata disagrees with the records");
    }
    if (const std::string* nz = t.find_meta("nz"); nz && parse_long(*nz, "nz") != static_cast<long>(f.nz())) {
        fail(ErrorKind::data, std::string(origin) + ": nz metadata disagrees with the records");
    }
    try {
        f.validate();
    } catch (const Error& e) {
        fail(ErrorKind::data, std::string(origin) + ": " + e.what());
    }
    return f;
}

std::string write_load_csv(const LoadGrid& grid) {
    grid.validate();
    std::string out;
    put_header(out, loads_schema);
    put_meta(out, "sampling_rate_hz", num(grid.sampling_rate_hz));
    put_meta(out, "duration_s", num(grid.duration_s));
    out += "dx_over_l,dz_over_l,vehicle,mean_Fz_over_W,std_Fz,mean_My_over_Wl,std_My,trials\n";
    for (Vehicle veh : {Vehicle::upper, Vehicle::lower}) {
        const LoadSurface& s = grid.surface(veh);
        for (std::size_t iz = 0; iz < grid.ndz(); ++iz) {
            for (std::size_t ix = 0; ix < grid.ndx(); ++ix) {
                const std::size_t k = grid.index(iz, ix);
                put_row(out, {num(grid.dx[ix]), num(grid.dz[iz]), std::string(to_string(veh)),
                              num(s.thrust_ratio[k]), num(s.thrust_std[k]), num(s.pitch_ratio[k]),
                              num(s.pitch_std[k]), std::to_string(grid.trial_count)});
            }
        }
    }
    return out;
}

LoadGrid parse_load_csv(std::string_view text, std::string_view origin) {
    const CsvTable t = parse_csv(text, origin);
    expect_schema(t, loads_schema, origin);
    const std::size_t cdx = t.column("dx_over_l"), cdz = t.column("dz_over_l"), cveh = t.column("vehicle"),
                      cf = t.column("mean_Fz_over_W"), cfs = t.column("std_Fz"),
                      cm = t.column("mean_My_over_Wl"), cms = t.column("std_My"), ctr = t.column("trials");
    struct Rec {
        double dx, dz, f, fs, m, ms;
        Vehicle veh;
        long trials;
        std::size_t line;
    };
    std::vector<Rec> recs;
    std::vector<double> dxs, dzs;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string where = at_line(origin, t.row_lines[r]);
        try {
            Rec rec{parse_double(row[cdx], "dx_over_l"), parse_double(row[cdz], "dz_over_l"),
                    parse_double(row[cf], "mean_Fz_over_W"), parse_double(row[cfs], "std_Fz"),
                    parse_double(row[cm], "mean_My_over_Wl"), parse_double(row[cms], "std_My"),
                    Vehicle::lower, parse_long(row[ctr], "trials"), t.row_lines[r]};
            try {
                rec.veh = parse_vehicle(row[cveh]);
            } catch (const Error& e) {
                fail(ErrorKind::data, e.what());
            }
            recs.push_back(rec);
            dxs.push_back(rec.dx);
            dzs.push_back(rec.dz);
        } catch (const Error& e) {
            fail(ErrorKind::data, where + e.what());
        }
    }
    require(!recs.empty(), ErrorKind::data, "load csv has no records");

    LoadGrid g;
    g.dx = axis_of(dxs);
    g.dz = axis_of(dzs);
    for (Vehicle veh : {Vehicle::upper, Vehicle::lower}) {
        LoadSurface& s = g.surface(veh);
        for (auto* vec : {&s.thrust_ratio, &s.thrust_std, &s.pitch_ratio, &s.pitch_std}) {
            vec->assign(g.size(), 0.0);
        }
    }
    std::map<std::pair<int, std::size_t>, std::size_t> seen;
    long trials = -1;
    for (const Rec& rec : recs) {
        const std::size_t k = g.index(locate(g.dz, rec.dz), locate(g.dx, rec.dx));
        const auto key = std::make_pair(rec.veh == Vehicle::upper ? 0 : 1, k);
        if (auto it = seen.find(key); it != seen.end()) {
            fail(ErrorKind::data, at_line(origin, rec.line) + "duplicate record for " +
                                      std::string(to_string(rec.veh)) + " at dx=" + num(rec.dx) +
                                      ", dz=" + num(rec.dz) + " (first on line " +
                                      std::to_string(it->second) + ")");
        }
        seen.emplace(key, rec.line);
        if (trials < 0) trials = rec.trials;
        if (rec.trials != trials) {
            fail(ErrorKind::data, at_line(origin, rec.line) + "trial count differs from earlier records");
        }
        LoadSurface& s = g.surface(rec.veh);
        s.thrust_ratio[k] = rec.f;
        s.thrust_std[k] = rec.fs;
        s.pitch_ratio[k] = rec.m;
        s.pitch_std[k] = rec.ms;
    }
    if (seen.size() != 2 * g.size()) {
        fail(ErrorKind::data, std::string(origin) + ": expected one record per node per vehicle (" +
                                  std::to_string(2 * g.size()) + "), found " + std::to_string(seen.size()));
    }
    g.trial_count = trials;
    if (const std::string* v = t.find_meta("sampling_rate_hz")) g.sampling_rate_hz = parse_double(*v, "sampling_rate_hz");
    if (const std::string* v = t.find_meta("duration_s")) g.duration_s = parse_double(*v, "duration_s");
    try {
        g.validate();
    } catch (const Error& e) {
        fail(ErrorKind::data, std::string(origin) + ": " + e.what());
    }
    return g;
}

std::string write_stations_csv(const StationTable& table) {
    std::string out;
    put_header(out, stations_schema);
    put_meta(out, "length_unit", to_string(table.length_unit));
    put_meta(out, "velocity_unit", to_string(table.velocity_unit));
    put_meta(out, "merge_point", num(table.merge_point));
    out += "z,u_c,u_max,x_at_max,r_half,merged\n";
    for (const Station& s : table.stations) {
        put_row(out, {num(s.z), num(s.u_c), num(s.u_max), num(s.x_at_max),
                      s.has_r_half ? num(s.r_half) : std::string(), s.merged ? "1" : "0"});
    }
    return out;
}

StationTable parse_stations_csv(std::string_view text, std::string_view origin) {
    const CsvTable t = parse_csv(text, origin);
    expect_schema(t, stations_schema, origin);
    StationTable table;
    table.length_unit = length_unit_meta(t, origin);
    table.velocity_unit = velocity_unit_meta(t, origin);
    table.merge_point = parse_double(required_meta(t, "merge_point", origin), "merge_point");
    const std::size_t cz = t.column("z"), cuc = t.column("u_c"), cum = t.column("u_max"),
                      cxm = t.column("x_at_max"), crh = t.column("r_half"), cmg = t.column("merged");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        try {
            Station s;
            s.z = parse_double(row[cz], "z");
            s.u_c = parse_double(row[cuc], "u_c");
            s.u_max = parse_double(row[cum], "u_max");
            s.x_at_max = parse_double(row[cxm], "x_at_max");
            s.has_r_half = !row[crh].empty();
            if (s.has_r_half) s.r_half = parse_double(row[crh], "r_half");
            s.merged = parse_flag(row[cmg], "merged") != 0;
            table.stations.push_back(s);
        } catch (const Error& e) {
            fail(ErrorKind::data, at_line(origin, t.row_lines[r]) + e.what());
        }
    }
    return table;
}

std::string write_query_csv(const std::vector<LoadSample>& samples) {
    std::string out;
    put_header(out, queries_schema);
    out += "dx_over_l,dz_over_l,vehicle,thrust_ratio,thrust_std,pitch_ratio,pitch_std,provenance,clamped\n";
    for (const LoadSample& s : samples) {
        put_row(out, {num(s.dx), num(s.dz), std::string(to_string(s.vehicle)), num(s.thrust_ratio),
                      num(s.thrust_std), num(s.pitch_ratio), num(s.pitch_std),
                      std::string(to_string(s.provenance)), s.clamped ? "1" : "0"});
    }
    return out;
}

std::string write_timeseries_csv(const LoadTimeSeries& series, double arm_length_m) {
    std::string out;
    put_header(out, timeseries_schema);
    put_meta(out, "samples", std::to_string(series.size()));
    out += "t_s,dz_m,dz_over_l,dz_dot_mps,thrust_ratio,pitch_ratio,phase_rad,cycle,clamped\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        put_row(out, {num(series.t[i]), num(series.dz[i]), num(series.dz[i] / arm_length_m),
                      num(series.dz_dot[i]), num(series.thrust_ratio[i]), num(series.pitch_ratio[i]),
                      num(series.phase[i]), std::to_string(series.cycle[i]),
                      series.clamped[i] ? "1" : "0"});
    }
    return out;
}

std::string write_loop_csv(const HysteresisLoop& loop) {
    std::string out;
    put_header(out, loop_schema);
    put_meta(out, "bins", std::to_string(loop.bins()));
    out += "phase_rad,dz_m,dz_dot_mps,thrust_mean,thrust_std,pitch_mean,pitch_std,weight\n";
    for (std::size_t b = 0; b < loop.bins(); ++b) {
        put_row(out, {num(loop.phase_bin_centers[b]), num(loop.dz_mean[b]), num(loop.dz_dot_mean[b]),
                      num(loop.thrust_mean[b]), num(loop.thrust_std[b]), num(loop.pitch_mean[b]),
                      num(loop.pitch_std[b]), num(loop.weight[b])});
    }
    return out;
}

}  // namespace downwash::io
