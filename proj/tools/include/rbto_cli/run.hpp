#pragma once

#include "rbto_cli/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rbto::cli {

struct RunOutput {
    std::filesystem::path directory;
    nlohmann::json log;
};

/// Runs one configuration in its own output directory: echoes the resolved
/// config, writes the artifacts of `mode` and the run log. On failure an
/// error.json record is left in the directory and the error is rethrown.
RunOutput execute(Mode mode, const RunConfig& config, std::ostream* progress = nullptr);

/// Machine-readable error record.
nlohmann::json error_record(const std::exception& e);

/// Process exit status for an error.
int exit_code(const std::exception& e);

/// Entry point of the `rbto` executable (subcommands dto, rbto, verify, sweep).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace rbto::cli
