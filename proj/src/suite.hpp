#pragma once

#include "report.hpp"

#include <vector>

namespace rbdsde {

/// Runs every built-in fixture through the solvers and the property checks.
/// Report names are "<fixture>/<check>". Deterministic.
std::vector<CheckReport> run_verify_suite();

}  // namespace rbdsde
