#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace rbdsde {

namespace {

DecoupledDrivers drivers_at(const ScenarioLattice& lattice, const DriverPair& pair,
                            const Solution& theta) {
    DecoupledDrivers dr = DecoupledDrivers::zero(lattice);
    const auto d = static_cast<std::size_t>(lattice.w_dim());
    const auto m = static_cast<std::size_t>(lattice.mark_count());
    const auto bd = static_cast<std::size_t>(lattice.b_dim());
    const NodeId nonterminal = lattice.layer_begin(lattice.steps());
    for (std::size_t b = 0; b < lattice.b_path_count(); ++b) {
        const PathSolution& p = theta.paths[b];
        for (NodeId node = 0; node < nonterminal; ++node) {
            DriverArgs a;
            a.step = lattice.time_index(node);
            a.t = lattice.grid().time(a.step);
            a.node = node;
            a.b_path = b;
            a.y = p.y[node];
            a.z = std::span<const double>(p.z).subspan(node * d, d);
            a.u = std::span<const double>(p.u).subspan(node * m, m);
            const DriverValues v = eval_drivers(pair, lattice, a);
            dr.f[b][node] = v.f;
            std::copy(v.g.begin(), v.g.end(), dr.g[b].begin() + static_cast<std::ptrdiff_t>(node * bd));
        }
    }
    return dr;
}

PathFields difference(const PathFields& a, const PathFields& b) {
    PathFields out = a;
    for (std::size_t k = 0; k < out.size(); ++k) {
        for (std::size_t j = 0; j < out[k].size(); ++j) out[k][j] -= b[k][j];
    }
    return out;
}

double max_gap(const PathFields& lo, const PathFields& hi, std::size_t& b_at, NodeId& node_at) {
    double worst = -INFINITY;
    for (std::size_t b = 0; b < lo.size(); ++b) {
        for (NodeId k = 0; k < lo[b].size(); ++k) {
            const double v = lo[b][k] - hi[b][k];
            if (v > worst) {
                worst = v;
                b_at = b;
                node_at = k;
            }
        }
    }
    return worst;
}

}  // namespace

PicardResult picard_solve(const ScenarioLattice& lattice, const DriverPair& pair,
                          const Barrier& barrier, const StochasticLipschitzData& data,
                          const PicardOptions& options) {
    if (pair.regime != Regime::lipschitz) {
        throw PreconditionError("picard_solve: driver '" + pair.name +
                                "' is in the growth regime; use minimal_solution_solve");
    }
    if (!(options.beta > 0.0)) throw PreconditionError("picard_solve: beta must be > 0");
    if (!(options.tolerance > 0.0)) throw PreconditionError("picard_solve: tolerance must be > 0");
    if (options.max_iter < 1) throw PreconditionError("picard_solve: max_iter must be >= 1");
    data.validate(lattice);
    barrier.validate(lattice);
    const BetaFloor floor = beta_floor(options.epsilon, data.alpha);
    const WeightProcess weights = node_weights(data, lattice);

    PicardResult res;
    PicardTrace& tr = res.trace;
    tr.beta = options.beta;
    tr.epsilon = options.epsilon;
    tr.alpha = data.alpha;
    tr.beta0 = floor.beta0;
    tr.tolerance = options.tolerance;
    tr.beta_below_floor = options.beta < floor.beta0;

    Solution prev = zero_solution(lattice);
    if (options.start == PicardOptions::Start::barrier_lift) {
        for (auto& p : prev.paths) {
            for (NodeId k = 0; k < lattice.node_count(); ++k) {
                p.y[k] = barrier.value(k);
                p.y_plus[k] = barrier.right_limit(k);
            }
        }
    }

    int above_one = 0;
    for (int it = 1; it <= options.max_iter; ++it) {
        Solution next = solve_decoupled(lattice, drivers_at(lattice, pair, prev), barrier);
        const NormReport nr = weighted_norms(lattice, weights, difference(next.y(), prev.y()),
                                             difference(next.z(), prev.z()),
                                             difference(next.u(), prev.u()), options.beta);
        const double diff = nr.bundle;
        if (!std::isfinite(diff)) {
            throw NumericError("picard_solve: non-finite iterate at iteration " + std::to_string(it));
        }
        double ratio = 0.0;
        if (it > 1 && tr.diffs.back() > 0.0) ratio = diff / tr.diffs.back();
        tr.diffs.push_back(diff);
        tr.ratios.push_back(ratio);
        prev = std::move(next);
        if (diff <= options.tolerance) {
            tr.converged = true;
            break;
        }
        above_one = ratio > 1.0 ? above_one + 1 : 0;
        if (above_one >= 3 && !tr.beta_below_floor) {
            std::ostringstream os;
            os << "picard_solve: diverging (ratio > 1 for 3 consecutive iterations, last "
               << ratio << " at iteration " << it << ")";
            throw DivergenceError(os.str(), tr);
        }
    }
    res.solution = std::move(prev);
    return res;
}

MinimalResult minimal_solution_solve(const ScenarioLattice& lattice, const DriverPair& pair,
                                     const Barrier& barrier, const StochasticLipschitzData& data,
                                     const MinimalOptions& options) {
    if (pair.regime != Regime::growth) {
        throw PreconditionError("minimal_solution_solve: driver must be in the growth regime");
    }
    if (options.n_max < 1) throw PreconditionError("minimal_solution_solve: n_max must be >= 1");
    data.validate(lattice, true);
    const ProbeReport growth = probe_growth(pair, data, lattice, options.growth_probes);
    if (!growth.pass) {
        throw HypothesisViolation("minimal_solution_solve: linear growth fails: " + growth.worst);
    }

    MinimalResult res;
    for (int n = 1; n <= options.n_max; ++n) {
        const DriverPair fn = regularized_driver(pair, data, lattice, n, options.domain);
        PicardResult pr = picard_solve(lattice, fn, barrier, data, options.picard);
        res.history.push_back(pr.solution.y());
        if (n == options.n_max) res.solution = std::move(pr.solution);
    }
    res.envelope_y = picard_solve(lattice, growth_envelope(pair, data, lattice), barrier, data,
                                  options.picard)
                         .solution.y();

    auto require = [&](const PathFields& lo, const PathFields& hi, const std::string& what) {
        std::size_t b = 0;
        NodeId node = 0;
        const double gap = max_gap(lo, hi, b, node);
        if (gap > options.order_tolerance) {
            std::ostringstream os;
            os << "minimal_solution_solve: ordering " << what << " violated by " << gap
               << " at b-path " << b << ", node " << node
               << "; the inf-convolution search domain is likely too small";
            throw NumericError(os.str());
        }
    };
    for (std::size_t n = 1; n < res.history.size(); ++n) {
        require(res.history[n - 1], res.history[n], "Y^" + std::to_string(n) + " <= Y^" + std::to_string(n + 1));
    }
    require(res.history.back(), res.envelope_y, "Y^n <= envelope");

    if (res.history.size() > 1) {
        std::size_t b = 0;
        NodeId node = 0;
        res.sup_gap = std::max(0.0, max_gap(res.history.back(), res.history[res.history.size() - 2], b, node));
    }
    return res;
}

}  // namespace rbdsde
