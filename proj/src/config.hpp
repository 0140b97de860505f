#pragma once

#include "american.hpp"
#include "barrier.hpp"
#include "coefficients.hpp"
#include "lattice.hpp"
#include "solver.hpp"

#include <optional>
#include <string>

namespace rbdsde {

enum class Mode { decoupled, picard, minimal, price_american, verify_suite };

Mode parse_mode(const std::string& name);  // ConfigError("mode") on unknown names
std::string mode_name(Mode mode);

/// Parsed experiment description. Keys are documented in the README; every
/// parse failure throws ConfigError naming the dotted key.
struct RunConfig {
    Mode mode = Mode::decoupled;
    LatticeConfig lattice;
    DriverPair pair;
    bool driver_given = false;
    BarrierSpec barrier;
    std::optional<double> beta;
    double epsilon = 0.5;
    double tolerance = 1e-12;
    int max_iter = 200;
    int n_max = 5;
    SearchDomain search;
    AmericanClaimConfig american;
    std::optional<double> american_volatility;  // CRR walk: up = exp(vol sqrt(dt)), down = 1/up
    std::string out_dir = "out";

    // Raw per-step Lipschitz inputs (scalar broadcast or one value per step).
    struct Coeffs {
        std::vector<double> gamma{1.0}, kappa{0.0}, sigma{0.0}, rho{0.0}, zeta{0.0};
        double alpha = 0.25;
    } coeffs;
};

/// Overrides applied after parsing (command-line flags beat file values).
/// apply_overrides must always run: it also checks the keys a flag can supply.
struct Overrides {
    std::optional<std::string> out_dir;
    std::optional<double> beta;
    int refine = 1;
};

RunConfig parse_config_text(const std::string& text, Mode mode);
/// Parses the body of a "lattice" object on its own.
LatticeConfig parse_lattice_text(const std::string& text);
RunConfig load_config(const std::string& path, Mode mode);
void apply_overrides(RunConfig& config, const Overrides& overrides);

/// Lipschitz data for `steps` steps from the raw coefficients.
StochasticLipschitzData lipschitz_data(const RunConfig& config, int steps);

}  // namespace rbdsde
