#pragma once

#include "barrier.hpp"
#include "coefficients.hpp"
#include "lattice.hpp"
#include "report.hpp"
#include "solver.hpp"

#include <cstdint>

namespace rbdsde {

/// One side of a comparison: the driver and barrier that produced a solution.
struct ComparisonInput {
    DriverPair pair;
    Barrier barrier;
};

/// Y1 <= Y2 + 1e-10 at every node. Throws HypothesisViolation unless
/// xi1 <= xi2 at every node, f1 <= f2 and g1 == g2 on deterministic probes.
CheckReport check_comparison(const ScenarioLattice& lattice, const Solution& sol1,
                             const Solution& sol2, const ComparisonInput& in1,
                             const ComparisonInput& in2, std::size_t probes = 500,
                             std::uint64_t seed = 3, double probe_radius = 5.0);

/// Decoupled inputs of one solve.
struct DecoupledInput {
    DecoupledDrivers drivers;
    Barrier barrier;
};

/// Both sides of
///   ||dY||^2_{M^{2,a}} + ||dZ||^2_{M^2} + ||dU||^2_{L^2}
///     <= ||dxi||^2_{S^2_{2beta}} + ||df/a||^2_{M^2}/(beta-1) + ||dg||^2_{M^2}
/// for two decoupled solves. Violation is max(0, LHS/RHS - 1); pass iff it
/// is within `slack`. params: lhs, rhs, ratio, beta, steps.
CheckReport check_apriori(const ScenarioLattice& lattice, const Solution& sol1, const Solution& sol2,
                          const DecoupledInput& in1, const DecoupledInput& in2,
                          const StochasticLipschitzData& data, double beta, double slack = 0.05);

/// Every ratio from iteration 2 on is <= eps + alpha + 0.05 and the log
/// differences decay with least-squares slope <= log(eps + alpha) + 0.1.
/// A trace that reached an exact fixed point passes trivially.
CheckReport check_contraction(const PicardTrace& trace, double epsilon, double alpha);

/// Brute-force maximum over all stopping rules of the expected stopped reward
/// on one b-path, compared with Y_0 of solve_decoupled (tolerance 1e-12).
/// params: oracle, y0, rules.
CheckReport snell_oracle(const ScenarioLattice& lattice, const DecoupledDrivers& drivers,
                         const Barrier& barrier, std::size_t b_path,
                         std::size_t atom_budget = kDefaultAtomBudget);

}  // namespace rbdsde
