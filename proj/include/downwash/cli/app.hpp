// Command-line entry point shared by the `downwash` tool and the tests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "downwash/error.hpp"
#include "downwash/io/config.hpp"

namespace downwash::cli {

/// Stable process exit codes.
enum ExitCode : int {
    exit_ok = 0,
    exit_internal = 1,
    exit_config = 2,
    exit_data = 3,
    exit_validity = 4,
};

ExitCode exit_code_for(ErrorKind kind) noexcept;

/// Resolved global settings for one invocation.
struct Context {
    io::RunConfig config;
    std::filesystem::path out_dir = ".";
    std::filesystem::path data_dir;  // DOWNWASH_DATA_DIR, empty when unset
    io::OutputUnits units = io::OutputUnits::normalized;
    std::uint64_t seed = 0;
    bool extended = false;
    std::string input;  // --input override for the subcommand
    std::ostream* log = nullptr;
};

void cmd_field(const Context& ctx);
void cmd_analyze(const Context& ctx);
void cmd_fit(const Context& ctx);
void cmd_loads(const Context& ctx);
void cmd_envelope(const Context& ctx);
void cmd_dynsim(const Context& ctx);
void cmd_ingest(const Context& ctx);

/// Parses `args` (without the program name), runs the subcommand and
/// returns the exit code. Diagnostics go to `err`, progress to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace downwash::cli
