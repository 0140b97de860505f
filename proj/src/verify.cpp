#include "verify.hpp"

#include "errors.hpp"
#include "norms.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace rbdsde {

CheckReport check_comparison(const ScenarioLattice& lattice, const Solution& sol1,
                             const Solution& sol2, const ComparisonInput& in1,
                             const ComparisonInput& in2, std::size_t probes, std::uint64_t seed,
                             double probe_radius) {
    in1.barrier.validate(lattice);
    in2.barrier.validate(lattice);
    if (sol1.paths.size() != lattice.b_path_count() || sol2.paths.size() != lattice.b_path_count()) {
        throw PreconditionError("check_comparison: solutions do not match the lattice");
    }
    for (NodeId k = 0; k < lattice.node_count(); ++k) {
        if (in1.barrier.value(k) > in2.barrier.value(k) ||
            in1.barrier.right_limit(k) > in2.barrier.right_limit(k)) {
            std::ostringstream os;
            os << "check_comparison: xi1 > xi2 at node " << k << " (" << in1.barrier.value(k)
               << " > " << in2.barrier.value(k) << ")";
            throw HypothesisViolation(os.str());
        }
    }

    const auto d = static_cast<std::size_t>(lattice.w_dim());
    const auto m = static_cast<std::size_t>(lattice.mark_count());
    const NodeId nonterminal = lattice.layer_begin(lattice.steps());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> box(-probe_radius, probe_radius);
    std::uniform_int_distribution<NodeId> pick(0, nonterminal - 1);
    std::uniform_int_distribution<std::size_t> pick_b(0, lattice.b_path_count() - 1);
    std::vector<double> z(d), u(m);
    for (std::size_t p = 0; p < probes; ++p) {
        DriverArgs a;
        a.node = pick(rng);
        a.b_path = pick_b(rng);
        a.step = lattice.time_index(a.node);
        a.t = lattice.grid().time(a.step);
        a.y = box(rng);
        for (auto& v : z) v = box(rng);
        for (auto& v : u) v = box(rng);
        a.z = z;
        a.u = u;
        const auto v1 = eval_drivers(in1.pair, lattice, a);
        const auto v2 = eval_drivers(in2.pair, lattice, a);
        if (v1.f > v2.f || v1.g != v2.g) {
            std::ostringstream os;
            os << "check_comparison: " << (v1.f > v2.f ? "f1 > f2" : "g1 != g2") << " at node "
               << a.node << ", b-path " << a.b_path << ", y=" << a.y;
            throw HypothesisViolation(os.str());
        }
    }

    CheckReport r;
    r.name = "comparison";
    r.tolerance = 1e-10;
    r.params["probes"] = static_cast<double>(probes);
    for (std::size_t b = 0; b < lattice.b_path_count(); ++b) {
        for (NodeId k = 0; k < lattice.node_count(); ++k) {
            r.observe(sol1.paths[b].y[k] - sol2.paths[b].y[k], static_cast<long>(b),
                      static_cast<long>(k), lattice.time_index(k));
        }
    }
    r.finish();
    return r;
}

namespace {

PathFields diff_fields(const PathFields& a, const PathFields& b) {
    PathFields out = a;
    for (std::size_t k = 0; k < out.size(); ++k) {
        for (std::size_t j = 0; j < out[k].size(); ++j) out[k][j] -= b[k][j];
    }
    return out;
}

}  // namespace

CheckReport check_apriori(const ScenarioLattice& lattice, const Solution& sol1, const Solution& sol2,
                          const DecoupledInput& in1, const DecoupledInput& in2,
                          const StochasticLipschitzData& data, double beta, double slack) {
    if (!(beta > 1.0)) throw PreconditionError("check_apriori: beta must be > 1");
    const WeightProcess w = node_weights(data, lattice);
    const auto bu = static_cast<std::size_t>(lattice.b_dim());

    const NormReport dn = weighted_norms(lattice, w, diff_fields(sol1.y(), sol2.y()),
                                         diff_fields(sol1.z(), sol2.z()),
                                         diff_fields(sol1.u(), sol2.u()), beta);
    const double lhs = dn.m2a_beta + dn.m2beta_z + dn.l2beta_u;

    PathFields xi2(lattice.b_path_count(), std::vector<double>(lattice.node_count()));
    for (auto& v : xi2) {
        for (NodeId k = 0; k < v.size(); ++k) {
            const double x = in1.barrier.value(k) - in2.barrier.value(k);
            v[k] = x * x;
        }
    }
    const PathFields df = diff_fields(in1.drivers.f, in2.drivers.f);
    PathFields f_over_a2 = squared_magnitude(df, 1);
    for (auto& v : f_over_a2) {
        for (NodeId k = 0; k < v.size(); ++k) v[k] /= w.a2[k];
    }
    const double xi_term = s2_norm(lattice, w, xi2, 2.0 * beta);
    const double f_term = m2_norm(lattice, w, f_over_a2, beta, false) / (beta - 1.0);
    const double g_term =
        m2_norm(lattice, w, squared_magnitude(diff_fields(in1.drivers.g, in2.drivers.g), bu), beta, false);
    const double rhs = xi_term + f_term + g_term;

    CheckReport r;
    r.name = "apriori_estimate";
    r.tolerance = slack;
    r.params["beta"] = beta;
    r.params["steps"] = lattice.steps();
    r.params["lhs"] = lhs;
    r.params["rhs"] = rhs;
    r.params["ratio"] = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
    r.max_violation = rhs > 0.0 ? std::max(0.0, lhs / rhs - 1.0) : (lhs > 0.0 ? INFINITY : 0.0);
    r.finish();
    return r;
}

CheckReport check_contraction(const PicardTrace& trace, double epsilon, double alpha) {
    CheckReport r;
    r.name = "picard_contraction";
    r.tolerance = 0.0;
    r.params["epsilon"] = epsilon;
    r.params["alpha"] = alpha;
    r.params["beta"] = trace.beta;
    r.params["iterations"] = trace.iterations();
    const bool exact = std::find(trace.diffs.begin(), trace.diffs.end(), 0.0) != trace.diffs.end();
    if (exact) {
        r.detail = "exact fixed point reached";
        r.finish();
        return r;
    }
    if (trace.iterations() < 3) {
        throw PreconditionError("check_contraction: trace needs at least 3 iterations");
    }
    const double ratio_bound = epsilon + alpha + 0.05;
    double worst_ratio = 0.0;
    for (std::size_t k = 1; k < trace.ratios.size(); ++k) {
        worst_ratio = std::max(worst_ratio, trace.ratios[k]);
        r.observe(trace.ratios[k] - ratio_bound, -1, -1, static_cast<int>(k) + 1);
    }
    // Least-squares slope of log diff against the iteration number.
    const std::size_t n = trace.diffs.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = static_cast<double>(k + 1);
        const double y = std::log(trace.diffs[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double slope_bound = std::log(epsilon + alpha) + 0.1;
    r.params["max_ratio"] = worst_ratio;
    r.params["log_slope"] = slope;
    r.params["log_slope_bound"] = slope_bound;
    if (slope - slope_bound > r.max_violation) {
        r.max_violation = slope - slope_bound;
        r.time_index = -1;
        r.detail = "log-difference slope exceeds the geometric bound";
    }
    r.finish();
    return r;
}

CheckReport snell_oracle(const ScenarioLattice& lattice, const DecoupledDrivers& drivers,
                         const Barrier& barrier, std::size_t b_path, std::size_t atom_budget) {
    const auto rules = enumerate_stopping_rules(lattice, b_path, atom_budget);
    const Solution sol = solve_decoupled(lattice, drivers, barrier);
    const int bd = lattice.b_dim();
    const auto& f = drivers.f[b_path];
    const auto& g = drivers.g[b_path];

    // Per-node running reward for continuing one step: f dt + g dB.
    std::vector<double> carry(lattice.node_count(), 0.0);
    for (NodeId k = 0; k < lattice.layer_begin(lattice.steps()); ++k) {
        const int i = lattice.time_index(k);
        double c = f[k] * lattice.grid().dt(i);
        for (int j = 0; j < bd; ++j) c += g[k * bd + j] * lattice.b_increment(b_path, i, j);
        carry[k] = c;
    }

    double best = -INFINITY;
    std::vector<double> value(lattice.node_count());
    for (const auto& rule : rules) {
        const auto stop = rule.decisions(lattice);
        std::vector<std::uint8_t> reached(lattice.node_count(), 0);
        reached[0] = 1;
        for (NodeId k = 1; k < lattice.node_count(); ++k) {
            const NodeId p = lattice.parent(k);
            reached[k] = reached[p] && !stop[p];
        }
        for (NodeId k = lattice.node_count(); k-- > 0;) {
            if (!reached[k]) {
                value[k] = 0.0;  // below an earlier stop; never rewarded
            } else if (stop[k]) {
                value[k] = barrier.value(k);
            } else if (!lattice.is_terminal(k)) {
                value[k] = carry[k] + conditional_expectation(lattice, value, k);
            } else {
                throw PreconditionError("snell_oracle: stopping rule misses leaf " + std::to_string(k));
            }
        }
        best = std::max(best, value[0]);
    }

    CheckReport r;
    r.name = "snell_oracle";
    r.tolerance = 1e-12;
    r.params["oracle"] = best;
    r.params["y0"] = sol.paths[b_path].y[0];
    r.params["rules"] = static_cast<double>(rules.size());
    r.observe(std::abs(best - sol.paths[b_path].y[0]), static_cast<long>(b_path), 0, 0);
    r.finish();
    return r;
}

}  // namespace rbdsde
