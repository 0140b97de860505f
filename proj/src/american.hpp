#pragma once

#include "barrier.hpp"
#include "lattice.hpp"
#include "solver.hpp"

#include <vector>

namespace rbdsde {

/// American put on a recombining binomial walk S -> S*up | S*down. `rate`
/// holds the short rate per unit time, either one value or one per step.
struct AmericanClaimConfig {
    double s0 = 1.0;
    double up = 1.1;
    double down = 0.9;
    std::vector<double> rate{0.0};
    double strike = 1.0;
    int n_steps = 1;
    double horizon = 1.0;
    double tolerance = 1e-28;  // Picard tolerance on the squared bundle difference
    int max_iter = 200;
};

struct AmericanResult {
    double price = 0.0;
    ScenarioLattice lattice;
    Barrier barrier;
    Solution solution;
    PicardTrace trace;
    std::vector<double> theta;  // implied market price of risk per step
    std::vector<double> rate;   // per step
};

/// Rate per step after broadcasting; throws unless up > 1 + r dt > down at every step.
std::vector<double> american_rates(const AmericanClaimConfig& config);

/// Driver f(V, Z) = -r_i V + theta_i Z with theta_i = (2 q_i - 1)/sqrt(dt) and
/// q_i = (1 + r_i dt - down)/(up - down), solved with the Picard engine.
AmericanResult price_american(const AmericanClaimConfig& config);

/// Classical backward induction V = max(K - S, (q V_up + (1-q) V_down)/(1 + r dt)).
double binomial_american_reference(const AmericanClaimConfig& config);

}  // namespace rbdsde
