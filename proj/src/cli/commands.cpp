#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>

#include "downwash/cli/app.hpp"
#include "downwash/io/csv.hpp"
#include "downwash/io/files.hpp"
#include "downwash/io/svg.hpp"

namespace downwash::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr const char* fit_schema = "downwash-fit v1";
constexpr const char* analysis_schema = "downwash-analysis v1";
constexpr const char* envelope_schema = "downwash-envelope v1";
constexpr const char* metrics_schema = "downwash-metrics v1";
constexpr const char* manifest_schema = "downwash-manifest v1";

std::string write_output(const Context& ctx, const std::string& name, const std::string& content) {
    io::atomic_write(ctx.out_dir / name, content);
    if (ctx.log) *ctx.log << "wrote " << (ctx.out_dir / name).string() << '\n';
    return io::sha256_hex(content);
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

/// Command-line inputs are taken as given; configured relative paths are
/// looked up under DOWNWASH_DATA_DIR, else next to the configuration file.
fs::path resolve_input(const Context& ctx, const std::string& configured, const fs::path& fallback) {
    if (!ctx.input.empty()) return ctx.input;
    if (configured.empty()) return fallback;
    fs::path p(configured);
    if (p.is_absolute()) return p;
    if (!ctx.data_dir.empty()) return ctx.data_dir / p;
    if (!ctx.config.origin.empty()) return ctx.config.origin.parent_path() / p;
    return p;
}

UnitFrame frame_of(const Context& ctx) { return hover_frame(ctx.config.vehicle, ctx.config.environment); }

LengthUnit length_unit_of(io::OutputUnits u) {
    return u == io::OutputUnits::si ? LengthUnit::meters : LengthUnit::arm_lengths;
}

VelocityUnit velocity_unit_of(io::OutputUnits u) {
    return u == io::OutputUnits::si ? VelocityUnit::m_per_s : VelocityUnit::induced_velocity;
}

VelocityField convert_field(VelocityField f, LengthUnit lu, VelocityUnit vu, const UnitFrame& frame) {
    const double kl = frame.length_factor(f.length_unit, lu);
    const double kv = frame.velocity_factor(f.velocity_unit, vu);
    if (kl != 1.0) {
        for (double& x : f.x) x *= kl;
        for (double& z : f.z) z *= kl;
    }
    if (kv != 1.0) {
        for (double& u : f.u) u *= kv;
        for (double& v : f.v) v *= kv;
    }
    f.length_unit = lu;
    f.velocity_unit = vu;
    return f;
}

ojson scaling_json(const JetScaling& s) {
    ojson j;
    j["spread_rate"] = s.spread_rate;
    j["decay_product"] = s.decay_product;
    j["virtual_origin"] = s.virtual_origin;
    j["merge_point"] = s.merge_point;
    j["initial_velocity"] = s.initial_velocity;
    j["length_unit"] = to_string(s.length_unit);
    j["velocity_unit"] = to_string(s.velocity_unit);
    return j;
}

JetScaling scaling_from_json(const nlohmann::json& j, const std::string& origin) {
    try {
        JetScaling s;
        s.spread_rate = j.at("spread_rate").get<double>();
        s.decay_product = j.at("decay_product").get<double>();
        s.virtual_origin = j.at("virtual_origin").get<double>();
        s.merge_point = j.at("merge_point").get<double>();
        s.initial_velocity = j.at("initial_velocity").get<double>();
        s.length_unit = parse_length_unit(j.at("length_unit").get<std::string>());
        s.velocity_unit = parse_velocity_unit(j.at("velocity_unit").get<std::string>());
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::data, origin + ": malformed scaling block: " + e.what());
    } catch (const Error& e) {
        fail(ErrorKind::data, origin + ": " + e.what());
    }
}

/// Configured scaling, or the scaling block of an earlier fit.json.
JetScaling resolve_scaling(const Context& ctx) {
    const io::RunConfig& cfg = ctx.config;
    if (cfg.scaling_from_fit.empty()) return cfg.scaling;
    Context plain = ctx;
    plain.input.clear();
    const fs::path path = resolve_input(plain, cfg.scaling_from_fit, {});
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::data, path.string() + ": malformed JSON: " + e.what());
    }
    if (j.value("schema", "") != fit_schema) fail(ErrorKind::data, path.string() + ": not a fit result");
    if (!j.contains("scaling")) fail(ErrorKind::data, path.string() + ": missing scaling block");
    return scaling_from_json(j["scaling"], path.string());
}

DownwashModel make_model(const Context& ctx, const JetScaling& scaling) {
    const io::RunConfig& cfg = ctx.config;
    return DownwashModel(cfg.vehicle, scaling,
                         cfg.near_field.apply(NearFieldConfig::defaults(cfg.vehicle, cfg.environment, scaling)));
}

io::StationTable analyze_stations(const VelocityField& field, const io::AnalyzeOptions& opts) {
    io::StationTable table;
    table.length_unit = field.length_unit;
    table.velocity_unit = field.velocity_unit;
    table.merge_point = detect_merge_point(field, opts.merge_eps, opts.merge_window);
    for (double z : field.z) {
        const VelocityProfile p = extract_profile(field, z, ProfileSampling::nearest);
        const CenterlineMax cm = centerline_and_max(p);
        io::Station s;
        s.z = z;
        s.u_c = cm.u_c;
        s.u_max = cm.u_max;
        s.x_at_max = cm.x_at_max;
        s.merged = z >= table.merge_point;
        try {
            s.r_half = half_width_from_profile(p, opts.slope_tolerance);
            s.has_r_half = true;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::validity && e.kind() != ErrorKind::range) throw;
        }
        table.stations.push_back(s);
    }
    return table;
}

VelocityField load_field(const fs::path& path) {
    return io::parse_field_csv(io::read_file(path), path.string());
}

LoadGrid load_grid(const Context& ctx) {
    const io::LoadsOptions& o = ctx.config.loads;
    if (o.synthetic && ctx.input.empty()) return anchored_synthetic_grid();
    fs::path fallback;
    if (!ctx.data_dir.empty()) fallback = ctx.data_dir / "loads.csv";
    const fs::path path = resolve_input(ctx, o.input, fallback);
    if (path.empty()) {
        fail(ErrorKind::config, "no load data: set loads.input, loads.synthetic or DOWNWASH_DATA_DIR");
    }
    return io::parse_load_csv(io::read_file(path), path.string());
}

ojson envelope_json(const InteractionEnvelope& env, double k) {
    ojson j;
    j["threshold"] = env.threshold;
    j["lateral_extent"] = env.lateral_extent * k;
    j["axial_extent"] = env.axial_extent * k;
    j["ellipse"] = {{"a_lateral", env.a_lateral * k}, {"b_axial", env.b_axial * k}};
    ojson contours = ojson::array();
    for (const auto& line : env.contours) {
        ojson pts = ojson::array();
        for (const Point& p : line) pts.push_back({p.x * k, p.z * k});
        contours.push_back(std::move(pts));
    }
    j["contours"] = std::move(contours);
    return j;
}

// Far-field reference parameters for the normalized single-vehicle jet.
constexpr double reference_spread_rate = 0.0667;
constexpr double reference_decay_product = 9.508;
constexpr double reference_virtual_origin = -6.0585;

}  // namespace

void cmd_field(const Context& ctx) {
    const io::RunConfig& cfg = ctx.config;
    const JetScaling scaling = resolve_scaling(ctx);
    const DownwashModel model = make_model(ctx, scaling);
    VelocityField field = evaluate_field(model, cfg.field.grid);

    if (cfg.field.noise_sigma > 0.0) {
        std::mt19937_64 rng(ctx.seed);
        std::normal_distribution<double> noise(0.0, cfg.field.noise_sigma * scaling.initial_velocity);
        std::vector<VelocityField> frames(static_cast<std::size_t>(cfg.field.frames), field);
        for (VelocityField& f : frames) {
            for (std::size_t i = 0; i < f.size(); ++i) {
                f.u[i] += noise(rng);
                f.v[i] += noise(rng);
            }
        }
        field = time_average(frames);
    }

    field = convert_field(std::move(field), length_unit_of(ctx.units), velocity_unit_of(ctx.units), frame_of(ctx));
    write_output(ctx, "field.csv", io::write_field_csv(field));
    if (cfg.field.svg) write_output(ctx, "field.svg", io::field_heatmap_svg(field));
}

void cmd_analyze(const Context& ctx) {
    const io::AnalyzeOptions& o = ctx.config.analyze;
    const UnitFrame frame = frame_of(ctx);
    const VelocityField field = convert_field(load_field(resolve_input(ctx, o.input, ctx.out_dir / "field.csv")),
                                              length_unit_of(ctx.units), velocity_unit_of(ctx.units), frame);
    const io::StationTable table = analyze_stations(field, o);
    const JetScaling scaling = resolve_scaling(ctx).converted(field.length_unit, field.velocity_unit, frame);

    const double kl = frame.length_factor(LengthUnit::arm_lengths, field.length_unit);
    std::vector<VelocityProfile> profiles;
    for (double s : o.collapse_stations) {
        const double z = s * kl;
        if (z < field.z.front() || z > field.z.back()) continue;
        profiles.push_back(extract_profile(field, z, ProfileSampling::interpolate));
    }

    ojson j;
    j["schema"] = analysis_schema;
    j["length_unit"] = to_string(field.length_unit);
    j["velocity_unit"] = to_string(field.velocity_unit);
    j["merge_point"] = table.merge_point;
    j["merge_eps"] = o.merge_eps;
    j["grid_step"] = field.nz() > 1 ? field.z[1] - field.z[0] : 0.0;
    j["stations"] = table.stations.size();
    j["stations_with_half_width"] =
        std::count_if(table.stations.begin(), table.stations.end(), [](const io::Station& s) { return s.has_r_half; });
    if (!profiles.empty()) {
        const CollapseReport rep = similarity_collapse(profiles, scaling, {o.xi_max, false});
        j["collapse"] = {{"stations", rep.stations},
                         {"xi_max", o.xi_max},
                         {"rms_residual_axial", rep.rms_residual_axial},
                         {"rms_residual_lateral", rep.rms_residual_lateral},
                         {"residual_unit", "fraction of centerline velocity"}};
    }
    write_output(ctx, "stations.csv", io::write_stations_csv(table));
    write_output(ctx, "analysis.json", dump(j));
}

void cmd_fit(const Context& ctx) {
    const io::FitOptions& o = ctx.config.fit;
    const UnitFrame frame = frame_of(ctx);
    const fs::path path = resolve_input(ctx, o.input, ctx.out_dir / "stations.csv");
    const std::string text = io::read_file(path);
    io::StationTable table;
    if (text.rfind("# " + std::string(io::field_schema), 0) == 0) {
        const VelocityField field = convert_field(io::parse_field_csv(text, path.string()), length_unit_of(ctx.units),
                                                  velocity_unit_of(ctx.units), frame);
        table = analyze_stations(field, ctx.config.analyze);
    } else {
        table = io::parse_stations_csv(text, path.string());
    }

    // The fit range is configured in arm lengths.
    const double kl = frame.length_factor(LengthUnit::arm_lengths, table.length_unit);
    const FitRange range{o.range.lo * kl, o.range.hi * kl};
    GrowthSeries growth;
    DecaySeries decay;
    for (const io::Station& s : table.stations) {
        if (!s.merged || !s.has_r_half || s.z < range.lo || s.z > range.hi) continue;
        growth.z.push_back(s.z);
        growth.r_half.push_back(s.r_half);
        decay.z.push_back(s.z);
        decay.u_c.push_back(s.u_c);
    }
    if (static_cast<int>(growth.z.size()) < o.min_stations) {
        fail(ErrorKind::range, "insufficient far-field stations in the fit range [" + io::format_double(o.range.lo) +
                                   ", " + io::format_double(o.range.hi) + "]: found " +
                                   std::to_string(growth.z.size()) + ", need " + std::to_string(o.min_stations));
    }

    JointFitOptions jo;
    jo.range = range;
    jo.inverse_variance = o.inverse_variance;
    jo.base = resolve_scaling(ctx).converted(table.length_unit, table.velocity_unit, frame);
    const double u0 = jo.base.initial_velocity;
    FitResult fit = joint_fit(growth, decay, u0, jo);
    fit.scaling.merge_point = table.merge_point;

    ojson j;
    j["schema"] = fit_schema;
    j["length_unit"] = to_string(table.length_unit);
    j["velocity_unit"] = to_string(table.velocity_unit);
    j["fit_range"] = {range.lo, range.hi};
    j["stations_used"] = growth.z.size();
    j["scaling"] = scaling_json(fit.scaling);
    j["residual_rms"] = {{"growth", fit.residual_growth}, {"decay", fit.residual_decay}};
    j["separate_virtual_origins"] = {{"growth", fit.z0_growth}, {"decay", fit.z0_decay}};
    j["series_weights"] = {{"growth", fit.weights.growth}, {"decay", fit.weights.decay}};
    j["virtual_origin_fallback"] = fit.z0_fallback;
    const JetScaling norm = fit.scaling.converted(LengthUnit::arm_lengths, VelocityUnit::induced_velocity, frame);
    const auto rel = [](double v, double ref) { return (v - ref) / std::fabs(ref); };
    j["reference_deviation"] = {{"spread_rate", rel(norm.spread_rate, reference_spread_rate)},
                                {"decay_product", rel(norm.decay_product, reference_decay_product)},
                                {"virtual_origin", rel(norm.virtual_origin, reference_virtual_origin)}};
    write_output(ctx, "fit.json", dump(j));
}

void cmd_loads(const Context& ctx) {
    const io::LoadsOptions& o = ctx.config.loads;
    const LoadGrid grid = load_grid(ctx);
    std::vector<LoadSample> samples;
    const auto add = [&](double dx, double dz, std::optional<Vehicle> v) {
        for (Vehicle veh : {Vehicle::upper, Vehicle::lower}) {
            if (!v || *v == veh) samples.push_back(query_loads(grid, veh, dx, dz, o.policy));
        }
    };
    for (const io::LoadQuery& q : o.queries) add(q.dx, q.dz, q.vehicle);
    for (double dz : o.sweep_dz) {
        for (double dx : o.sweep_dx) add(dx, dz, std::nullopt);
    }
    write_output(ctx, "queries.csv", io::write_query_csv(samples));
}

void cmd_envelope(const Context& ctx) {
    const io::EnvelopeOptions& o = ctx.config.envelope;
    const LoadGrid grid = load_grid(ctx);
    const double k = ctx.units == io::OutputUnits::si ? ctx.config.vehicle.arm_length_m : 1.0;

    ojson j;
    j["schema"] = envelope_schema;
    j["length_unit"] = to_string(length_unit_of(ctx.units));
    j["vehicle"] = to_string(o.vehicle);
    j["influence"] = envelope_json(influence_envelope(grid, o.vehicle, o.threshold), k);
    j["unsteadiness"] = envelope_json(unsteadiness_envelope(grid, o.vehicle, o.std_threshold), k);
    ojson peaks = ojson::array();
    for (const PitchPeak& p : peak_pitch_offset(grid, o.vehicle)) {
        peaks.push_back({{"dz", p.dz * k}, {"dx", p.dx * k}, {"pitch_ratio", p.pitch_ratio}});
    }
    j["pitch_peaks"] = std::move(peaks);
    if (o.deficit) {
        const JetScaling scaling =
            resolve_scaling(ctx).converted(LengthUnit::arm_lengths, VelocityUnit::induced_velocity, frame_of(ctx));
        const DeficitModel model = DeficitModel::calibrate(scaling, ctx.config.vehicle, grid, o.vehicle);
        j["deficit"] = {{"gain", model.gain()},
                        {"calibration", {{"dx", model.calibration_dx() * k}, {"dz", model.calibration_dz() * k}}},
                        {"spearman", deficit_rank_correlation(model, grid, o.vehicle)}};
    }
    write_output(ctx, "envelope.json", dump(j));
}

void cmd_dynsim(const Context& ctx) {
    const io::DynsimOptions& o = ctx.config.dynsim;
    const io::RunConfig& cfg = ctx.config;
    DynamicProfile profile = o.profile;
    profile.extended = ctx.extended;
    profile.validate();
    const LoadGrid grid = load_grid(ctx);

    LagModel lag = o.lag == io::LagKind::wake ? wake_convection_lag(cfg.vehicle, cfg.environment) : zero_lag();
    lag.gain = o.gain;
    const LoadTimeSeries series = simulate_loads(grid, profile, cfg.vehicle, lag, {o.substeps, o.vehicle});
    const HysteresisLoop loop = phase_average(stable_portion(series, profile), o.bins);
    const LoopMetrics m = loop_metrics(loop);

    double max_rate = 0.0;
    for (double r : series.dz_dot) max_rate = std::max(max_rate, std::fabs(r));
    const auto clamped = std::count(series.clamped.begin(), series.clamped.end(), std::uint8_t{1});

    ojson j;
    j["schema"] = metrics_schema;
    j["profile"] = {{"dz_min_m", profile.dz_min_m},
                    {"amplitude_m", profile.amplitude_m},
                    {"frequency_hz", profile.frequency_hz},
                    {"configuration", to_string(profile.configuration)},
                    {"cycles", {profile.ramp_up_cycles, profile.stable_cycles, profile.ramp_down_cycles}},
                    {"sample_rate_hz", profile.sample_rate_hz},
                    {"extended", profile.extended}};
    j["lag"] = o.lag == io::LagKind::wake ? "wake" : "none";
    j["gain"] = o.gain;
    j["vehicle"] = to_string(o.vehicle);
    j["samples"] = series.size();
    j["clamped_samples"] = clamped;
    j["peak_rate_mps"] = peak_rate(profile);
    j["max_abs_dz_dot_mps"] = max_rate;
    j["loop"] = {{"bins", loop.bins()},
                 {"loop_area", m.loop_area},
                 {"asymmetry", m.asymmetry},
                 {"thrust_min", m.thrust_min},
                 {"thrust_max", m.thrust_max},
                 {"pitch_min", m.pitch_min},
                 {"pitch_max", m.pitch_max},
                 {"pitch_range", m.pitch_range},
                 {"mean_abs_pitch", m.mean_abs_pitch},
                 {"mean_dz_m", m.mean_dz}};
    write_output(ctx, "timeseries.csv", io::write_timeseries_csv(series, cfg.vehicle.arm_length_m));
    write_output(ctx, "loop.csv", io::write_loop_csv(loop));
    write_output(ctx, "metrics.json", dump(j));
}

namespace {

/// Applies the column mapping: returns, per canonical column, the index of
/// its source column (or npos when optional and absent).
std::vector<std::size_t> map_columns(const io::CsvTable& t, const io::IngestOptions& in,
                                     const std::vector<std::string>& canonical,
                                     const std::set<std::string>& optional, const std::string& origin) {
    for (const auto& [name, src] : in.columns) {
        if (std::find(canonical.begin(), canonical.end(), name) == canonical.end()) {
            fail(ErrorKind::config, "ingest.columns: unknown canonical column '" + name + "'");
        }
    }
    for (const auto& [name, factor] : in.scale) {
        if (std::find(canonical.begin(), canonical.end(), name) == canonical.end()) {
            fail(ErrorKind::config, "ingest.scale: unknown canonical column '" + name + "'");
        }
    }
    std::vector<std::size_t> idx;
    std::set<std::string> used;
    std::vector<std::string> missing;
    for (const auto& name : canonical) {
        auto it = in.columns.find(name);
        const std::string src = it == in.columns.end() ? name : it->second;
        const auto pos = std::find(t.columns.begin(), t.columns.end(), src);
        if (pos == t.columns.end()) {
            if (!optional.count(name) || it != in.columns.end()) missing.push_back(name + " <- '" + src + "'");
            idx.push_back(std::string::npos);
            continue;
        }
        idx.push_back(static_cast<std::size_t>(pos - t.columns.begin()));
        used.insert(src);
    }
    if (!missing.empty()) {
        std::string msg = origin + ": mapped columns not found in source:";
        for (const auto& m : missing) msg += " " + m;
        fail(ErrorKind::conversion, msg);
    }
    std::vector<std::string> unmapped;
    for (const auto& c : t.columns) {
        if (!used.count(c) && std::find(in.ignore.begin(), in.ignore.end(), c) == in.ignore.end()) {
            unmapped.push_back(c);
        }
    }
    if (!unmapped.empty()) {
        std::string msg = origin + ": unmapped source columns:";
        for (const auto& c : unmapped) msg += " '" + c + "'";
        fail(ErrorKind::conversion, msg + " (map them in ingest.columns or list them in ingest.ignore)");
    }
    return idx;
}

double scale_of(const io::IngestOptions& in, const std::string& name) {
    auto it = in.scale.find(name);
    return it == in.scale.end() ? 1.0 : it->second;
}

double mapped_value(const io::CsvTable& t, std::size_t r, std::size_t col, const io::IngestOptions& in,
                    const std::string& name, const std::string& origin) {
    try {
        const double v = io::parse_double(t.rows[r][col], name);
        const double k = scale_of(in, name);
        return k == 1.0 ? v : v * k;
    } catch (const Error& e) {
        fail(ErrorKind::data, origin + ":" + std::to_string(t.row_lines[r]) + ": " + e.what());
    }
}

template <class Parse>
auto meta_unit(Parse parse, const std::string& text, const std::string& origin) {
    try {
        return parse(text);
    } catch (const Error& e) {
        fail(ErrorKind::data, origin + ": " + e.what());
    }
}

std::string ingest_field(const io::CsvTable& t, const io::IngestOptions& in, const std::string& origin) {
    static const std::vector<std::string> canonical{"x", "z", "u", "v", "valid"};
    const auto idx = map_columns(t, in, canonical, {"valid"}, origin);
    std::vector<double> x, z, u, v;
    std::vector<std::uint8_t> valid;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        x.push_back(mapped_value(t, r, idx[0], in, "x", origin));
        z.push_back(mapped_value(t, r, idx[1], in, "z", origin));
        u.push_back(mapped_value(t, r, idx[2], in, "u", origin));
        v.push_back(mapped_value(t, r, idx[3], in, "v", origin));
        if (idx[4] == std::string::npos) {
            valid.push_back(1);
        } else {
            const std::string& cell = t.rows[r][idx[4]];
            if (cell != "0" && cell != "1") {
                fail(ErrorKind::data, origin + ":" + std::to_string(t.row_lines[r]) + ": invalid flag '" + cell + "'");
            }
            valid.push_back(cell == "1");
        }
    }
    VelocityField f = io::field_from_records(x, z, u, v, valid, origin);

    const std::string* meta_lu = t.find_meta("length_unit");
    const std::string* meta_vu = t.find_meta("velocity_unit");
    if (in.length_unit) {
        f.length_unit = *in.length_unit;
    } else if (meta_lu) {
        f.length_unit = meta_unit(parse_length_unit, *meta_lu, origin);
    } else {
        fail(ErrorKind::conversion, origin + ": length unit not declared (set ingest.length_unit)");
    }
    if (in.velocity_unit) {
        f.velocity_unit = *in.velocity_unit;
    } else if (meta_vu) {
        f.velocity_unit = meta_unit(parse_velocity_unit, *meta_vu, origin);
    } else {
        fail(ErrorKind::conversion, origin + ": velocity unit not declared (set ingest.velocity_unit)");
    }
    if (in.frame_count) {
        f.frame_count = *in.frame_count;
    } else if (const std::string* fc = t.find_meta("frame_count")) {
        f.frame_count = io::parse_long(*fc, "frame_count");
    }
    try {
        f.validate();
    } catch (const Error& e) {
        fail(ErrorKind::data, origin + ": " + e.what());
    }
    return io::write_field_csv(f);
}

std::string ingest_loads(const io::CsvTable& t, const io::IngestOptions& in, const std::string& origin) {
    static const std::vector<std::string> canonical{"dx_over_l", "dz_over_l", "vehicle", "mean_Fz_over_W",
                                                    "std_Fz", "mean_My_over_Wl", "std_My", "trials"};
    const auto idx = map_columns(t, in, canonical, {"trials"}, origin);
    if (idx[7] == std::string::npos && !in.trials) {
        fail(ErrorKind::conversion, origin + ": no trials column; set ingest.trials");
    }
    if (in.scale.count("vehicle") || in.scale.count("trials")) {
        fail(ErrorKind::config, "ingest.scale: vehicle and trials cannot be scaled");
    }
    // Re-emit as canonical text and let the canonical parser check completeness.
    std::string text = "# " + std::string(io::loads_schema) + "\n";
    for (const char* key : {"sampling_rate_hz", "duration_s"}) {
        if (const std::string* v = t.find_meta(key)) text += std::string("# ") + key + "=" + *v + "\n";
    }
    text += "dx_over_l,dz_over_l,vehicle,mean_Fz_over_W,std_Fz,mean_My_over_Wl,std_My,trials\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (std::size_t c = 0; c < canonical.size(); ++c) {
            if (c) text += ',';
            if (c == 2) {
                text += t.rows[r][idx[c]];
            } else if (c == 7) {
                text += idx[7] == std::string::npos ? std::to_string(*in.trials) : t.rows[r][idx[7]];
            } else {
                text += io::format_double(mapped_value(t, r, idx[c], in, canonical[c], origin));
            }
        }
        text += '\n';
    }
    return io::write_load_csv(io::parse_load_csv(text, origin));
}

}  // namespace

void cmd_ingest(const Context& ctx) {
    const io::IngestOptions& in = ctx.config.ingest;
    ojson manifest;
    manifest["schema"] = manifest_schema;
    manifest["kind"] = in.kind;
    ojson sources = ojson::array();
    std::string name, content;

    if (in.kind == "synthetic-loads") {
        name = "loads.csv";
        content = io::write_load_csv(anchored_synthetic_grid());
        manifest["generator"] = "anchored-synthetic";
    } else {
        const fs::path path = resolve_input(ctx, in.source, {});
        if (path.empty()) fail(ErrorKind::config, "ingest needs a source (ingest.source or --input)");
        const std::string raw = io::read_file(path);
        sources.push_back({{"name", path.filename().string()}, {"sha256", io::sha256_hex(raw)}, {"bytes", raw.size()}});
        const io::CsvTable table = io::parse_csv(raw, path.string());
        if (in.kind == "field") {
            name = "field.csv";
            content = ingest_field(table, in, path.string());
        } else {
            name = "loads.csv";
            content = ingest_loads(table, in, path.string());
        }
        manifest["mapping"] = {{"columns", in.columns}, {"scale", in.scale}, {"ignore", in.ignore}};
    }
    manifest["sources"] = std::move(sources);
    const std::string digest = write_output(ctx, name, content);
    manifest["outputs"] = ojson::array({{{"name", name}, {"sha256", digest}, {"bytes", content.size()}}});
    write_output(ctx, "manifest.json", dump(manifest));
}

}  // namespace downwash::cli
