#include "downwash/cli/app.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <functional>
#include <map>
#include <ostream>

namespace downwash::cli {

ExitCode exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::config:
        case ErrorKind::argument:
            return exit_config;
        case ErrorKind::data:
        case ErrorKind::shape:
        case ErrorKind::conversion:
        case ErrorKind::stitch:
        case ErrorKind::state:
            return exit_data;
        case ErrorKind::validity:
        case ErrorKind::range:
        case ErrorKind::domain:
        case ErrorKind::fit:
        case ErrorKind::not_merged:
        case ErrorKind::degenerate:
        case ErrorKind::binning:
        case ErrorKind::aliasing:
            return exit_validity;
    }
    return exit_internal;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multirotor downwash model, analysis and interaction-load toolkit", "downwash"};
    app.require_subcommand(1, 1);

    std::string config_path, units_text, out_dir = ".", input;
    std::uint64_t seed = 0;
    bool extended = false;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--units", units_text, "output units")->check(CLI::IsMember({"normalized", "si"}));
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "seed for noisy synthesis")->capture_default_str();
    app.add_flag("--extended", extended, "lift the replication parameter ranges");

    const std::map<std::string, std::pair<const char*, std::function<void(const Context&)>>> commands{
        {"field", {"evaluate the model on a grid (field.csv, field.svg)", cmd_field}},
        {"analyze", {"extract stations and the merge point from a field (stations.csv, analysis.json)", cmd_analyze}},
        {"fit", {"fit the far-field scaling laws (fit.json)", cmd_fit}},
        {"loads", {"query the interaction-load surfaces (queries.csv)", cmd_loads}},
        {"envelope", {"interaction envelopes and pitch peaks (envelope.json)", cmd_envelope}},
        {"dynsim", {"dynamic vertical-approach simulation (timeseries.csv, loop.csv, metrics.json)", cmd_dynsim}},
        {"ingest", {"convert a dataset file to a canonical CSV (manifest.json)", cmd_ingest}},
    };
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        sub->fallthrough();
        if (name != "field") sub->add_option("--input", input, "input file overriding the configuration");
    }

    std::vector<const char*> argv{"downwash"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        Context ctx;
        if (!config_path.empty()) ctx.config = io::load_config(config_path);
        ctx.out_dir = out_dir;
        if (const char* dir = std::getenv("DOWNWASH_DATA_DIR"); dir && *dir) ctx.data_dir = dir;
        if (!units_text.empty()) {
            ctx.units = io::parse_output_units(units_text);
        } else if (ctx.config.units) {
            ctx.units = *ctx.config.units;
        }
        ctx.seed = seed;
        ctx.extended = extended;
        ctx.input = input;
        ctx.log = &out;
        std::filesystem::create_directories(ctx.out_dir);
        const std::string name = app.get_subcommands().front()->get_name();
        commands.at(name).second(ctx);
        return exit_ok;
    } catch (const Error& e) {
        err << "downwash: " << to_string(e.kind()) << " error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "downwash: data error: " << e.what() << '\n';
        return exit_data;
    } catch (const std::exception& e) {
        err << "downwash: internal error: " << e.what() << '\n';
        return exit_internal;
    }
}

}  // namespace downwash::cli
