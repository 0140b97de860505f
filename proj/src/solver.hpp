#pragma once

#include "barrier.hpp"
#include "coefficients.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "norms.hpp"
#include "report.hpp"

#include <vector>

namespace rbdsde {

/// Node-indexed solution on one b-path. Vector fields are strided:
/// z has w_dim entries per node, u has mark_count, g_used has b_dim.
///
/// Reflection masses are stored as increments. dk_c / dk_d at node n is the
/// push applied over the step leaving n (Delta K_{i+1}, known at n); dc at n
/// is Y_i - Y_{i+}. orth is indexed by branch (outcome_count entries per
/// non-terminal node): the part of Y_{i+1} that the W and compensated-jump
/// increments of the step do not represent.
struct PathSolution {
    std::vector<double> y, y_plus, z, u;
    std::vector<double> dk_c, dk_d, dc;
    std::vector<double> orth;
    std::vector<double> f_used, g_used;
};

struct Solution {
    int w_dim = 1;
    int mark_count = 0;
    int b_dim = 1;
    std::vector<PathSolution> paths;

    PathFields y() const;
    PathFields z() const;
    PathFields u() const;
};

Solution zero_solution(const ScenarioLattice& lattice);

/// Cumulative processes per node (non-recombining lattices only). K and K^d sum
/// the increments of strict ancestors; C also includes the node's own jump.
struct CumulativeReflection {
    std::vector<double> k, k_d, c;
};

CumulativeReflection cumulative_reflection(const ScenarioLattice& lattice, const PathSolution& path);

/// Driver values that do not depend on the solution: f per node and g
/// (b_dim per node), one field per b-path.
struct DecoupledDrivers {
    PathFields f;
    PathFields g;

    static DecoupledDrivers zero(const ScenarioLattice& lattice);
};

/// Backward induction with two-stage reflection (against xi_{i+}, then xi_i).
Solution solve_decoupled(const ScenarioLattice& lattice, const DecoupledDrivers& drivers,
                         const Barrier& barrier);

struct MartingaleComponents {
    std::vector<double> z;         // w_dim
    std::vector<double> u;         // mark_count
    double mean = 0.0;             // E[Y_{i+1} | node]
    std::vector<double> residual;  // per branch, orthogonal to all increments
};

/// Projection of the next-layer values on the W and compensated-jump
/// increments of `node`'s step.
MartingaleComponents extract_martingale_components(const ScenarioLattice& lattice,
                                                   std::span<const double> next_values,
                                                   NodeId node);

/// Discrete Mertens decomposition Y~ = N - K - C_-. dk/dk_d/dc sit at the
/// deciding node as in PathSolution; dn is indexed by branch like orth.
struct MertensDecomposition {
    PathFields dn, dk, dk_d, dc;
    PathFields n, k, c;  // cumulative (C includes own jump); empty on recombining lattices
};

MertensDecomposition mertens_split(const ScenarioLattice& lattice, const PathFields& ytilde,
                                   const PathFields& ytilde_right,
                                   const std::vector<bool>& predictable_times,
                                   double tolerance = 1e-12);

struct PicardOptions {
    enum class Start { zero, barrier_lift };
    double beta = 0.0;
    double epsilon = 0.5;
    double tolerance = 1e-10;
    int max_iter = 100;
    Start start = Start::zero;
};

/// Per-iteration squared B^2_beta differences ||Theta^{n} - Theta^{n-1}||^2.
struct PicardTrace {
    std::vector<double> diffs;   // diffs[k] belongs to iteration k+1
    std::vector<double> ratios;  // ratios[k] = diffs[k]/diffs[k-1]; ratios[0] = 0
    double beta = 0.0;
    double epsilon = 0.0;
    double alpha = 0.0;
    double beta0 = 0.0;
    double tolerance = 0.0;
    bool converged = false;
    bool beta_below_floor = false;

    int iterations() const { return static_cast<int>(diffs.size()); }
};

class DivergenceError : public NumericError {
public:
    DivergenceError(const std::string& what, PicardTrace trace)
        : NumericError(what), trace_(std::move(trace)) {}
    const PicardTrace& trace() const noexcept { return trace_; }

private:
    PicardTrace trace_;
};

struct PicardResult {
    Solution solution;
    PicardTrace trace;
};

PicardResult picard_solve(const ScenarioLattice& lattice, const DriverPair& pair,
                          const Barrier& barrier, const StochasticLipschitzData& data,
                          const PicardOptions& options);

struct MinimalOptions {
    PicardOptions picard;
    int n_max = 10;
    SearchDomain domain;
    double order_tolerance = 1e-10;
    std::size_t growth_probes = 1000;
};

struct MinimalResult {
    Solution solution;                // driver f_{n_max}
    std::vector<PathFields> history;  // Y^n for n = 1..n_max
    PathFields envelope_y;            // solution with the envelope F
    double sup_gap = 0.0;             // max (Y^{n_max} - Y^{n_max-1})
};

MinimalResult minimal_solution_solve(const ScenarioLattice& lattice, const DriverPair& pair,
                                     const Barrier& barrier, const StochasticLipschitzData& data,
                                     const MinimalOptions& options);

struct ValidationOptions {
    double tolerance = 1e-12;       // residual, domination, products
    double mean_tolerance = 1e-13;  // conditional means of martingale increments
    double driver_tolerance = 1e-6; // |f(Theta) - f_used| when a driver pair is given
};

struct ValidationReport {
    std::vector<CheckReport> checks;
    bool pass = true;

    const CheckReport* find(const std::string& name) const;
};

/// Checks the discrete solution system. With `pair`, also checks that the
/// stored driver values agree with the driver evaluated at the solution.
ValidationReport validate_solution(const ScenarioLattice& lattice, const Solution& solution,
                                   const Barrier& barrier, const DriverPair* pair = nullptr,
                                   const ValidationOptions& options = {});

}  // namespace rbdsde
