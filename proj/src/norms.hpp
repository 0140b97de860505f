#pragma once

#include "coefficients.hpp"
#include "lattice.hpp"

#include <optional>
#include <vector>

namespace rbdsde {

/// One node-indexed field per b-path. Vector-valued fields (Z, U, g) store
/// `stride` consecutive entries per node.
using PathFields = std::vector<std::vector<double>>;

/// Beta-weighted norms of (Y, Z, U); `bundle` is the B^2_beta norm squared.
struct NormReport {
    double s2beta = 0.0;    // E max_i e^{beta A_i} |Y_i|^2
    double m2a_beta = 0.0;  // E sum_i e^{beta A_i} a_i^2 |Y_i|^2 dt_i
    double m2beta_z = 0.0;  // E sum_i e^{beta A_i} |Z_i|^2 dt_i
    double l2beta_u = 0.0;  // E sum_i e^{beta A_i} ||U_i||_lambda^2 dt_i
    double bundle = 0.0;
    double beta = 0.0;
    std::optional<double> barrier_s2_2beta;
};

/// Pointwise |v|^2 of a strided field.
PathFields squared_magnitude(const PathFields& field, std::size_t stride);

/// E over b-paths and atoms of the pathwise running maximum of a
/// nonnegative node field. Exact on trees and on recombining lattices.
double expected_running_max(const ScenarioLattice& lattice, const PathFields& values);

/// E sum over non-terminal nodes of integrand(node) * dt (left-endpoint rule).
double expected_left_sum(const ScenarioLattice& lattice, const PathFields& integrand);

/// E max e^{beta A}|v|^2 for a scalar-squared field `sq` (the S^2_beta norm squared).
double s2_norm(const ScenarioLattice& lattice, const WeightProcess& w, const PathFields& sq,
               double beta);

/// E sum e^{beta A} (a^2 if `a_weighted`) sq dt (M^2_beta or M^{2,a}_beta norm squared).
double m2_norm(const ScenarioLattice& lattice, const WeightProcess& w, const PathFields& sq,
               double beta, bool a_weighted);

NormReport weighted_norms(const ScenarioLattice& lattice, const WeightProcess& w,
                          const PathFields& y, const PathFields& z, const PathFields& u,
                          double beta);

/// Adds ||xi||^2 in S^2_{2 beta} to `report`.
void attach_barrier_norm(NormReport& report, const ScenarioLattice& lattice, const WeightProcess& w,
                         std::span<const double> barrier_main);

}  // namespace rbdsde
