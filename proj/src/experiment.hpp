#pragma once

#include "config.hpp"
#include "report.hpp"

#include <string>
#include <vector>

namespace rbdsde {

struct ExperimentResult {
    int exit_code = 0;  // 0 all checks pass, 1 a check failed, 2 configuration error
    std::vector<CheckReport> checks;
    std::string message;
    std::vector<std::string> files;  // written, relative to the output directory
};

/// Runs one configured experiment and writes its files into config.out_dir.
ExperimentResult run_experiment(const RunConfig& config);

/// Loads the config (verify_suite needs none: pass an empty path), applies the
/// overrides and runs. Never throws: failures become exit codes and messages.
ExperimentResult run_from_file(Mode mode, const std::string& config_path, const Overrides& overrides);

}  // namespace rbdsde
