#pragma once

// Subcommand pipelines: each run writes report.json (always, success or
// failure) plus the command's CSV series into the configured output directory
// and yields the process exit code.

#include <string>
#include <vector>

#include "chapgas/config.hpp"
#include "chapgas/output.hpp"

namespace chapgas {

struct RunOutcome {
    // 0 success, 2 config error, 3 assumption failure, 4 numerical failure.
    int exit_code = 0;
    Json report;
};

RunOutcome run_command(const std::string& command, const RunConfig& cfg);

const std::vector<std::string>& command_names();

}  // namespace chapgas
