#pragma once

#include "lattice.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rbdsde {

/// Nonnegative coefficient process: piecewise constant on the grid, or given
/// per lattice node (node-indexed mode).
class CoefficientProcess {
public:
    CoefficientProcess() = default;
    static CoefficientProcess constant(int steps, double value);
    static CoefficientProcess per_step(std::vector<double> values);
    static CoefficientProcess per_node(std::vector<double> values);

    bool node_indexed() const noexcept { return node_indexed_; }
    std::size_t size() const noexcept { return values_.size(); }
    double at(int step, NodeId node) const {
        return node_indexed_ ? values_[node] : values_[static_cast<std::size_t>(step)];
    }
    std::span<const double> values() const noexcept { return values_; }

private:
    std::vector<double> values_;
    bool node_indexed_ = false;
};

/// Stochastic Lipschitz / linear-growth data (gamma, kappa, sigma, rho, zeta, alpha).
struct StochasticLipschitzData {
    CoefficientProcess gamma;
    CoefficientProcess kappa;
    CoefficientProcess sigma;
    CoefficientProcess rho;
    CoefficientProcess zeta;
    double alpha = 0.25;

    static StochasticLipschitzData constant(int steps, double gamma, double kappa, double sigma,
                                            double rho, double alpha, double zeta = 0.0);

    double a2(int step, NodeId node) const;
    /// Throws unless every process has the right length, is nonnegative, a^2 > 0
    /// everywhere and alpha lies in (0,1) (or (0,1/2) when `growth_regime`).
    void validate(const ScenarioLattice& lattice, bool growth_regime = false) const;
};

/// a^2_i = gamma + kappa^2 + sigma^2 + rho per step and A_i by left Riemann sums.
struct StepWeights {
    std::vector<double> a2;  // size N
    std::vector<double> A;   // size N+1, A_0 = 0
};

StepWeights a_process(const StochasticLipschitzData& data, const TimeGrid& grid);

/// a^2 and A per lattice node (A accumulated along the path to the node).
struct WeightProcess {
    std::vector<double> a2;
    std::vector<double> A;
};

WeightProcess node_weights(const StochasticLipschitzData& data, const ScenarioLattice& lattice);

enum class Regime { lipschitz, growth };

struct DriverArgs {
    double t = 0.0;
    int step = 0;
    NodeId node = 0;
    std::size_t b_path = 0;
    double y = 0.0;
    std::span<const double> z;
    std::span<const double> u;
};

using DriverFn = std::function<double(const DriverArgs&)>;
using NoiseFn = std::function<void(const DriverArgs&, std::span<double> out)>;

struct DriverPair {
    DriverFn f;
    NoiseFn g;
    Regime regime = Regime::lipschitz;
    std::string name = "custom";
};

/// ||u||_lambda = sqrt(sum_e |u(e)|^2 lambda(e)).
double lambda_norm(std::span<const double> u, std::span<const JumpMark> marks);

struct DriverValues {
    double f = 0.0;
    std::vector<double> g;
};

DriverValues eval_drivers(const DriverPair& pair, const ScenarioLattice& lattice,
                          const DriverArgs& args);

// Builtin drivers. Every g builtin fills all b_dim coordinates with the same value.
DriverPair zero_driver();
/// f = r y + theta . z (theta broadcast over coordinates when scalar).
DriverPair linear_pricing_driver(double r, std::vector<double> theta);
/// f = c0 + cy y + cz . z + cu . u ; g = g0 + gy y + gz . z + gu . u.
struct LinearDriverCoefficients {
    double c0 = 0.0, cy = 0.0;
    std::vector<double> cz, cu;
    double g0 = 0.0, gy = 0.0;
    std::vector<double> gz, gu;
};
DriverPair linear_driver(LinearDriverCoefficients c);
/// f = min(y^2, cap).
DriverPair quadratic_y_driver(double cap);
/// f = c |y|.
DriverPair abs_y_driver(double c);
/// f = amplitude sin(frequency y).
DriverPair sine_y_driver(double amplitude, double frequency);
/// f = sum_k coeffs[k] y^k.
DriverPair polynomial_driver(std::vector<double> coeffs);

/// Compact search box for the inf-convolution. An axis with 0 points is held
/// at the query coordinate; otherwise it is the uniform grid of `points`
/// values on [center - radius, center + radius]. The query point itself is
/// always a candidate.
struct SearchDomain {
    double radius_y = 5.0;
    int points_y = 101;
    double radius_z = 0.0;
    int points_z = 0;
    double radius_u = 0.0;
    int points_u = 0;
    double center_y = 0.0;
    double center_z = 0.0;
    double center_u = 0.0;
    std::size_t max_candidates = 2'000'000;
};

struct InfConvolution {
    double value = 0.0;
    /// Upper bound on value - f_n(exact) when the exact minimiser lies in the box.
    double resolution_bound = 0.0;
    double argmin_y = 0.0;
};

/// f_n(t,y,z,u) = inf over the search grid of
///   f(t,y',z',u') + n (gamma |y-y'| + kappa |z-z'| + sigma ||u-u'||_lambda).
InfConvolution inf_convolution(const DriverPair& pair, const StochasticLipschitzData& data,
                               const ScenarioLattice& lattice, int n, const DriverArgs& args,
                               const SearchDomain& domain);

/// Driver whose f is the grid inf-convolution f_n; g is unchanged.
DriverPair regularized_driver(const DriverPair& pair, const StochasticLipschitzData& data,
                              const ScenarioLattice& lattice, int n, const SearchDomain& domain);

/// F = zeta + gamma |y| + kappa |z| + sigma ||u||_lambda; g is unchanged.
DriverPair growth_envelope(const DriverPair& pair, const StochasticLipschitzData& data,
                           const ScenarioLattice& lattice);

struct BetaFloor {
    double c_bar = 0.0;
    double beta0 = 0.0;
};

/// c_bar = 2/(eps + alpha), beta0 = 1 + c_bar + 1/eps. Requires eps + alpha < 1.
BetaFloor beta_floor(double epsilon, double alpha);

struct ProbeReport {
    bool pass = true;
    double max_violation = 0.0;
    std::size_t probes = 0;
    std::string worst;
};

/// Finite-difference probes of the Lipschitz bounds on f and g at random
/// nodes and points (deterministic for a given seed).
ProbeReport probe_lipschitz(const DriverPair& pair, const StochasticLipschitzData& data,
                            const ScenarioLattice& lattice, std::size_t pairs,
                            std::uint64_t seed = 7, double radius = 5.0);

/// Probes |f| <= zeta + gamma|y| + kappa|z| + sigma||u||_lambda.
ProbeReport probe_growth(const DriverPair& pair, const StochasticLipschitzData& data,
                         const ScenarioLattice& lattice, std::size_t probes,
                         std::uint64_t seed = 11, double radius = 5.0);

}  // namespace rbdsde
