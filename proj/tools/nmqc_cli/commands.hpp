// commands.hpp: the nmqc subcommands, callable without going through argv
//
// Every command prints the resolved configuration to the log stream before computing and writes
// CSV files below cfg.output_dir whose comment header repeats that configuration and the master
// seed. Return values are process exit codes.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "nmqc/config.hpp"

namespace nmqc::cli {

enum ExitCode : int {
    kOk = 0,
    kRuntimeFailure = 1,
    kConfigInvalid = 2,
    kNotConverged = 3,
    kIoFailure = 4,
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Command-line values that override the configuration document.
struct Overrides {
    std::optional<std::filesystem::path> config_path;
    std::optional<std::string> preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> trajectories;
    std::optional<std::string> mode;
};

// Reads the document (if any), applies the preset and the flag overrides, validates.
// Throws ConfigError / ValidationError on bad input and IoError if the file cannot be read.
RunConfig resolve_config(const Overrides& ov);

struct Context {
    std::ostream& log;
    unsigned workers{0};  // ensemble threads; 0 picks hardware_concurrency
};

int cmd_coeffs(const RunConfig& cfg, const Context& ctx);
int cmd_control(const RunConfig& cfg, const Context& ctx);
int cmd_simulate(const RunConfig& cfg, const Context& ctx);
int cmd_ensemble(const RunConfig& cfg, const Context& ctx);
// Without a preset the fig1 preset is applied first.
int cmd_fig1(const RunConfig& cfg, const Context& ctx);
// A fig2a..fig2d preset selects one panel; otherwise all four panels are produced.
int cmd_fig2(const RunConfig& cfg, const Context& ctx);

// Dispatches by name and maps exceptions to exit codes, reporting them on err.
int run_command(std::string_view name, const RunConfig& cfg, const Context& ctx, std::ostream& err);

}  // namespace nmqc::cli
