#include "downwash/io/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

#include "downwash/error.hpp"
#include "downwash/io/files.hpp"

namespace downwash::io {
namespace {

using json = nlohmann::json;

/// Maps dotted key paths back to source lines by scanning for each quoted
/// key after the position of its parent.
class Locator {
public:
    explicit Locator(std::string_view text) : text_(text) {}

    std::size_t line_of(const std::vector<std::string>& path) const {
        std::size_t pos = 0;
        for (const auto& key : path) {
            if (key.empty() || key.front() == '[') continue;
            const std::size_t hit = text_.find("\"" + key + "\"", pos);
            if (hit == std::string_view::npos) break;
            pos = hit;
        }
        return line_at(pos);
    }

    std::size_t line_at(std::size_t byte) const {
        byte = std::min(byte, text_.size());
        return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<long>(byte), '\n'));
    }

private:
    std::string_view text_;
};

struct Ctx {
    const Locator& loc;
    std::string origin;

    [[noreturn]] void error(const std::vector<std::string>& path, const std::string& msg) const {
        std::string dotted;
        for (const auto& p : path) {
            if (!dotted.empty() && p.front() != '[') dotted += '.';
            dotted += p;
        }
        fail(ErrorKind::config, origin + ":" + std::to_string(loc.line_of(path)) + ": " +
                                    (dotted.empty() ? "" : dotted + ": ") + msg);
    }
};

/// View of one JSON object that records consumed keys so leftovers can be
/// reported as unknown.
class Block {
public:
    Block(const json& j, std::vector<std::string> path, const Ctx& ctx) : j_(j), path_(std::move(path)), ctx_(ctx) {
        if (!j_.is_object()) ctx_.error(path_, "expected an object");
    }

    ~Block() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) {
                auto p = path_;
                p.push_back(key);
                ctx_.error(p, "unknown key");
            }
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json* get(const std::string& key) {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::vector<std::string> path(const std::string& key) const {
        auto p = path_;
        p.push_back(key);
        return p;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) ctx_.error(path(key), "expected a number");
            out = v->get<double>();
        }
    }

    void number(const std::string& key, std::optional<double>& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) ctx_.error(path(key), "expected a number");
            out = v->get<double>();
        }
    }

    template <class Int>
    void integer(const std::string& key, Int& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) ctx_.error(path(key), "expected an integer");
            const long long raw = v->get<long long>();
            if (raw < 0) ctx_.error(path(key), "must be non-negative");
            out = static_cast<Int>(raw);
        }
    }

    void integer(const std::string& key, std::optional<long>& out) {
        long tmp = 0;
        if (has(key)) {
            integer(key, tmp);
            out = tmp;
        } else {
            used_.insert(key);
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = get(key)) {
            if (!v->is_boolean()) ctx_.error(path(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = get(key)) {
            if (!v->is_string()) ctx_.error(path(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    template <class Parse>
    auto choice(const std::string& key, Parse parse) -> std::optional<decltype(parse(std::string()))> {
        std::string s;
        if (!has(key)) {
            used_.insert(key);
            return std::nullopt;
        }
        string(key, s);
        try {
            return parse(s);
        } catch (const Error& e) {
            ctx_.error(path(key), e.what());
        }
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (const json* v = get(key)) {
            if (!v->is_array()) ctx_.error(path(key), "expected an array of numbers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) ctx_.error(path(key), "expected an array of numbers");
                out.push_back(e.get<double>());
            }
        }
    }

    const Ctx& ctx() const { return ctx_; }

private:
    const json& j_;
    std::vector<std::string> path_;
    const Ctx& ctx_;
    std::set<std::string> used_;
};

template <class Fn>
void sub(Block& parent, const std::string& key, Fn&& fn) {
    if (const json* v = parent.get(key)) {
        Block b(*v, parent.path(key), parent.ctx());
        fn(b);
    }
}

/// Rewraps library validation failures as configuration errors.
template <class Fn>
void checked(const Ctx& ctx, const std::vector<std::string>& path, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::validity) throw;
        ctx.error(path, e.what());
    }
}

OutOfRange parse_policy(const std::string& s) {
    if (s == "asymptotic") return OutOfRange::asymptotic;
    if (s == "clamp") return OutOfRange::clamp;
    if (s == "error") return OutOfRange::error;
    fail(ErrorKind::config, "unknown out-of-range policy '" + s + "' (asymptotic, clamp, error)");
}

LagKind parse_lag(const std::string& s) {
    if (s == "wake") return LagKind::wake;
    if (s == "none") return LagKind::none;
    fail(ErrorKind::config, "unknown lag model '" + s + "' (wake, none)");
}

std::string parse_kind(const std::string& s) {
    if (s == "field" || s == "loads" || s == "synthetic-loads") return s;
    fail(ErrorKind::config, "unknown ingest kind '" + s + "' (field, loads, synthetic-loads)");
}

}  // namespace

OutputUnits parse_output_units(std::string_view text) {
    if (text == "normalized") return OutputUnits::normalized;
    if (text == "si") return OutputUnits::si;
    fail(ErrorKind::config, "unknown units '" + std::string(text) + "' (normalized, si)");
}

NearFieldConfig NearFieldOverrides::apply(NearFieldConfig base) const {
    if (rotor_jet_peak) base.rotor_jet_peak = *rotor_jet_peak;
    if (annulus_inner_fraction) base.annulus_inner_fraction = *annulus_inner_fraction;
    if (jet_width_sigma) base.jet_width_sigma = *jet_width_sigma;
    if (inflow_peak_fraction) base.inflow_peak_fraction = *inflow_peak_fraction;
    if (blend_window) base.blend_window = *blend_window;
    return base;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& origin) {
    const Locator loc(text);
    const Ctx ctx{loc, origin.string()};
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        fail(ErrorKind::config, ctx.origin + ":" + std::to_string(loc.line_at(e.byte == 0 ? 0 : e.byte - 1)) +
                                    ": malformed JSON: " + e.what());
    }

    RunConfig cfg;
    cfg.origin = origin;
    Block top(root, {}, ctx);

    sub(top, "vehicle", [&](Block& b) {
        b.number("arm_length_m", cfg.vehicle.arm_length_m);
        b.number("rotor_radius_m", cfg.vehicle.rotor_radius_m);
        b.integer("rotor_count", cfg.vehicle.rotor_count);
        b.number("weight_n", cfg.vehicle.weight_n);
    });
    checked(ctx, {"vehicle"}, [&] { cfg.vehicle.validate(); });

    sub(top, "environment", [&](Block& b) {
        b.number("air_density", cfg.environment.air_density);
        b.number("kinematic_viscosity", cfg.environment.kinematic_viscosity);
    });
    checked(ctx, {"environment"}, [&] { cfg.environment.validate(); });

    sub(top, "scaling", [&](Block& b) {
        b.string("from_fit", cfg.scaling_from_fit);
        if (!cfg.scaling_from_fit.empty()) return;
        JetScaling& s = cfg.scaling;
        b.number("spread_rate", s.spread_rate);
        b.number("decay_product", s.decay_product);
        b.number("virtual_origin", s.virtual_origin);
        b.number("merge_point", s.merge_point);
        b.number("initial_velocity", s.initial_velocity);
        if (auto u = b.choice("length_unit", parse_length_unit)) s.length_unit = *u;
        if (auto u = b.choice("velocity_unit", parse_velocity_unit)) s.velocity_unit = *u;
    });
    checked(ctx, {"scaling"}, [&] { cfg.scaling.validate(); });

    sub(top, "near_field", [&](Block& b) {
        b.number("rotor_jet_peak", cfg.near_field.rotor_jet_peak);
        b.number("annulus_inner_fraction", cfg.near_field.annulus_inner_fraction);
        b.number("jet_width_sigma", cfg.near_field.jet_width_sigma);
        b.number("inflow_peak_fraction", cfg.near_field.inflow_peak_fraction);
        b.number("blend_window", cfg.near_field.blend_window);
    });
    checked(ctx, {"near_field"}, [&] {
        cfg.near_field.apply(NearFieldConfig::defaults(cfg.vehicle, cfg.environment, cfg.scaling)).validate();
    });

    if (auto u = top.choice("units", parse_output_units)) cfg.units = *u;

    sub(top, "field", [&](Block& b) {
        sub(b, "grid", [&](Block& g) {
            g.number("x_min", cfg.field.grid.x_min);
            g.number("x_max", cfg.field.grid.x_max);
            g.integer("nx", cfg.field.grid.nx);
            g.number("z_min", cfg.field.grid.z_min);
            g.number("z_max", cfg.field.grid.z_max);
            g.integer("nz", cfg.field.grid.nz);
        });
        b.integer("frames", cfg.field.frames);
        b.number("noise_sigma", cfg.field.noise_sigma);
        b.boolean("svg", cfg.field.svg);
    });
    checked(ctx, {"field", "grid"}, [&] { cfg.field.grid.validate(); });
    if (cfg.field.frames < 1) ctx.error({"field", "frames"}, "must be >= 1");
    if (!(cfg.field.noise_sigma >= 0.0)) ctx.error({"field", "noise_sigma"}, "must be non-negative");

    sub(top, "analyze", [&](Block& b) {
        b.string("input", cfg.analyze.input);
        b.number("merge_eps", cfg.analyze.merge_eps);
        b.integer("merge_window", cfg.analyze.merge_window);
        b.number("slope_tolerance", cfg.analyze.slope_tolerance);
        b.numbers("collapse_stations", cfg.analyze.collapse_stations);
        b.number("xi_max", cfg.analyze.xi_max);
    });
    if (!(cfg.analyze.merge_eps > 0.0)) ctx.error({"analyze", "merge_eps"}, "must be positive");
    if (cfg.analyze.merge_window < 1) ctx.error({"analyze", "merge_window"}, "must be >= 1");
    if (!(cfg.analyze.xi_max > 0.0)) ctx.error({"analyze", "xi_max"}, "must be positive");

    sub(top, "fit", [&](Block& b) {
        b.string("input", cfg.fit.input);
        std::vector<double> range;
        b.numbers("range", range);
        if (!range.empty()) {
            if (range.size() != 2 || !(range[0] < range[1])) b.ctx().error(b.path("range"), "expected [lo, hi] with lo < hi");
            cfg.fit.range = {range[0], range[1]};
        }
        b.boolean("inverse_variance", cfg.fit.inverse_variance);
        b.integer("min_stations", cfg.fit.min_stations);
    });
    if (cfg.fit.min_stations < 2) ctx.error({"fit", "min_stations"}, "must be >= 2");

    sub(top, "loads", [&](Block& b) {
        b.string("input", cfg.loads.input);
        b.boolean("synthetic", cfg.loads.synthetic);
        if (auto p = b.choice("policy", parse_policy)) cfg.loads.policy = *p;
        if (const json* q = b.get("queries")) {
            if (!q->is_array()) b.ctx().error(b.path("queries"), "expected an array");
            cfg.loads.queries.clear();
            for (std::size_t i = 0; i < q->size(); ++i) {
                Block e((*q)[i], {"loads", "queries", "[" + std::to_string(i) + "]"}, b.ctx());
                LoadQuery lq;
                if (!e.has("dx") || !e.has("dz")) b.ctx().error(b.path("queries"), "each query needs dx and dz");
                e.number("dx", lq.dx);
                e.number("dz", lq.dz);
                lq.vehicle = e.choice("vehicle", parse_vehicle);
                cfg.loads.queries.push_back(lq);
            }
        }
        sub(b, "sweep", [&](Block& s) {
            s.numbers("dx", cfg.loads.sweep_dx);
            s.numbers("dz", cfg.loads.sweep_dz);
        });
    });
    if (cfg.loads.sweep_dx.empty() != cfg.loads.sweep_dz.empty()) {
        ctx.error({"loads", "sweep"}, "dx and dz must both be given");
    }

    sub(top, "envelope", [&](Block& b) {
        if (auto v = b.choice("vehicle", parse_vehicle)) cfg.envelope.vehicle = *v;
        b.number("threshold", cfg.envelope.threshold);
        b.number("std_threshold", cfg.envelope.std_threshold);
        b.boolean("deficit", cfg.envelope.deficit);
    });

    sub(top, "dynsim", [&](Block& b) {
        DynamicProfile& p = cfg.dynsim.profile;
        b.number("dz_min_m", p.dz_min_m);
        b.number("amplitude_m", p.amplitude_m);
        b.number("frequency_hz", p.frequency_hz);
        if (auto c = b.choice("configuration", parse_configuration)) p.configuration = *c;
        b.integer("ramp_up_cycles", p.ramp_up_cycles);
        b.integer("stable_cycles", p.stable_cycles);
        b.integer("ramp_down_cycles", p.ramp_down_cycles);
        b.number("sample_rate_hz", p.sample_rate_hz);
        if (auto l = b.choice("lag", parse_lag)) cfg.dynsim.lag = *l;
        b.number("gain", cfg.dynsim.gain);
        b.integer("substeps", cfg.dynsim.substeps);
        if (auto v = b.choice("vehicle", parse_vehicle)) cfg.dynsim.vehicle = *v;
        b.integer("bins", cfg.dynsim.bins);
    });
    checked(ctx, {"dynsim"}, [&] {
        DynamicProfile p = cfg.dynsim.profile;
        p.extended = true;  // replication ranges depend on --extended and are checked at run time
        p.validate();
    });
    if (cfg.dynsim.substeps < 1) ctx.error({"dynsim", "substeps"}, "must be >= 1");

    sub(top, "ingest", [&](Block& b) {
        IngestOptions& in = cfg.ingest;
        if (auto k = b.choice("kind", parse_kind)) in.kind = *k;
        b.string("source", in.source);
        if (const json* cols = b.get("columns")) {
            if (!cols->is_object()) b.ctx().error(b.path("columns"), "expected an object");
            for (const auto& [k, v] : cols->items()) {
                if (!v.is_string()) b.ctx().error({"ingest", "columns", k}, "expected a column name");
                in.columns[k] = v.get<std::string>();
            }
        }
        if (const json* sc = b.get("scale")) {
            if (!sc->is_object()) b.ctx().error(b.path("scale"), "expected an object");
            for (const auto& [k, v] : sc->items()) {
                if (!v.is_number()) b.ctx().error({"ingest", "scale", k}, "expected a number");
                in.scale[k] = v.get<double>();
            }
        }
        if (const json* ig = b.get("ignore")) {
            if (!ig->is_array()) b.ctx().error(b.path("ignore"), "expected an array of column names");
            for (const auto& v : *ig) {
                if (!v.is_string()) b.ctx().error(b.path("ignore"), "expected an array of column names");
                in.ignore.push_back(v.get<std::string>());
            }
        }
        in.length_unit = b.choice("length_unit", parse_length_unit);
        in.velocity_unit = b.choice("velocity_unit", parse_velocity_unit);
        b.integer("frame_count", in.frame_count);
        b.integer("trials", in.trials);
    });
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        fail(ErrorKind::config, e.what());
    }
    return parse_config(text, path);
}

}  // namespace downwash::io
