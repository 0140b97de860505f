// Acceptance suite: one [PASS]/[FAIL] line per criterion. Exit status is the
// number of failed criteria.
#include "american.hpp"
#include "barrier.hpp"
#include "coefficients.hpp"
#include "config.hpp"
#include "experiment.hpp"
#include "lattice.hpp"
#include "solver.hpp"
#include "suite.hpp"
#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace rbdsde;

namespace {

struct Verdict {
    bool pass = true;
    std::string summary;
};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

ScenarioLattice tree(int n, double horizon, std::vector<JumpMark> marks, const std::string& rule) {
    LatticeConfig c;
    c.n_steps = n;
    c.horizon = horizon;
    c.marks = std::move(marks);
    c.b_path_rule = rule;
    return ScenarioLattice::build(c);
}

ScenarioLattice random_tree(Rng& rng, int n, double horizon) {
    std::vector<JumpMark> marks;
    if (pick(rng, 0, 1) == 1) marks.push_back({uniform(rng, -0.5, 0.5), uniform(rng, 0.2, 1.0)});
    return tree(n, horizon, std::move(marks), pick(rng, 0, 1) == 1 ? "binary:2" : "zero");
}

// Per-node barrier with random right jumps (right value below main value)
// and random predictable times.
Barrier random_barrier(Rng& rng, const ScenarioLattice& lat, bool right_continuous) {
    BarrierSpec s;
    s.kind = BarrierSpec::Kind::table;
    s.values.resize(lat.node_count());
    for (auto& v : s.values) v = uniform(rng, -1.0, 1.0);
    s.right_values = s.values;
    if (!right_continuous) {
        for (int t = 0; t < lat.steps(); ++t) {
            if (pick(rng, 0, 1) == 0) continue;
            for (NodeId k = lat.layer_begin(t); k < lat.layer_end(t); ++k) s.right_values[k] -= uniform(rng, 0.0, 0.6);
        }
    }
    for (int t = 1; t <= lat.steps(); ++t) {
        if (pick(rng, 0, 2) == 0) s.predictable_times.push_back(t);
    }
    return build_barrier(s, lat);
}

DecoupledDrivers random_drivers(Rng& rng, const ScenarioLattice& lat) {
    auto d = DecoupledDrivers::zero(lat);
    for (auto& f : d.f) {
        for (auto& v : f) v = uniform(rng, -1.0, 1.0);
    }
    for (auto& g : d.g) {
        for (auto& v : g) v = uniform(rng, -0.5, 0.5);
    }
    return d;
}

Barrier shifted(const ScenarioLattice& lat, const Barrier& base, Rng& rng) {
    BarrierSpec s;
    s.kind = BarrierSpec::Kind::table;
    s.values.resize(lat.node_count());
    s.right_values.resize(lat.node_count());
    for (NodeId k = 0; k < lat.node_count(); ++k) {
        const double up = uniform(rng, 0.0, 0.3);
        s.values[k] = base.value(k) + up;
        s.right_values[k] = lat.is_terminal(k) || !base.right_jump_at(lat.time_index(k))
                                ? s.values[k]
                                : std::min(base.right_limit(k) + up, s.values[k]);
    }
    for (int t = 1; t <= lat.steps(); ++t) {
        if (base.predictable_at(t)) s.predictable_times.push_back(t);
    }
    return build_barrier(s, lat);
}

// 1. Brute-force optimal stopping equals Y_0 of the backward induction.
Verdict snell_equivalence() {
    Rng rng(101);
    const auto t0 = std::chrono::steady_clock::now();
    int instances = 0, failed = 0;
    double worst = 0.0;
    for (int k = 0; k < 24; ++k) {
        const auto lat = random_tree(rng, pick(rng, 1, 3), uniform(rng, 0.5, 2.0));
        const auto bar = random_barrier(rng, lat, false);
        const auto drv = random_drivers(rng, lat);
        for (std::size_t b = 0; b < lat.b_path_count(); ++b) {
            const auto rep = snell_oracle(lat, drv, bar, b, 128);
            worst = std::max(worst, rep.max_violation);
            failed += rep.pass ? 0 : 1;
        }
        ++instances;
    }
    const double secs = seconds_since(t0);
    Verdict v;
    v.pass = failed == 0 && instances >= 20 && secs < 10.0;
    v.summary = std::to_string(instances) + " instances, " + std::to_string(failed) + " mismatches, max |oracle - Y0| " +
                fmt("%.3g", worst) + ", " + fmt("%.2f s", secs);
    return v;
}

// 2. Contraction of the Picard map at beta = beta0 and the exact one-step fixed point.
Verdict picard_contraction() {
    Rng rng(202);
    const double eps = 0.5, alpha = 0.25;
    const double beta = beta_floor(eps, alpha).beta0;
    const double cap = eps + alpha + 0.05;
    int instances = 0, failed = 0, max_iter_seen = 0;
    double worst_ratio = 0.0;
    std::string why;
    for (int k = 0; k < 12; ++k) {
        const auto lat = random_tree(rng, 4, uniform(rng, 0.5, 1.5));
        const auto bar = random_barrier(rng, lat, false);
        LinearDriverCoefficients c;
        c.c0 = uniform(rng, -1.0, 1.0);
        c.cy = uniform(rng, -1.0, 1.0);
        c.cz = {uniform(rng, -1.0, 1.0)};
        c.g0 = uniform(rng, -0.3, 0.3);
        c.gy = uniform(rng, -0.4, 0.4);
        c.gz = {uniform(rng, -0.25, 0.25)};
        double sigma = 0.0;
        if (lat.mark_count() == 1) {
            const double lambda = lat.marks()[0].intensity;
            c.cu = {uniform(rng, -0.5, 0.5)};
            c.gu = {uniform(rng, -0.2, 0.2) * std::sqrt(lambda)};
            sigma = std::abs(c.cu[0]) / std::sqrt(lambda);
        }
        // g is linear in (y, z, u): |dg|^2 <= 3 (gy^2 dy^2 + gz^2 dz^2 + gu^2/lambda du_lambda^2).
        const double gu2 = c.gu.empty() ? 0.0 : c.gu[0] * c.gu[0] / lat.marks()[0].intensity;
        if (3.0 * (c.gz[0] * c.gz[0] + gu2) > alpha) {
            --k;
            continue;
        }
        const DriverPair pair = linear_driver(c);
        const auto data = StochasticLipschitzData::constant(4, std::abs(c.cy) + 1e-3, std::abs(c.cz[0]), sigma,
                                                            3.0 * c.gy * c.gy, alpha);
        const auto probe = probe_lipschitz(pair, data, lat, 500);
        PicardOptions o;
        o.beta = beta;
        o.epsilon = eps;
        o.tolerance = 1e-10;
        o.max_iter = 40;
        const auto res = picard_solve(lat, pair, bar, data, o);
        bool ok = probe.pass && res.trace.converged;
        for (std::size_t j = 1; j < res.trace.ratios.size(); ++j) {
            worst_ratio = std::max(worst_ratio, res.trace.ratios[j]);
            ok = ok && res.trace.ratios[j] <= cap;
        }
        max_iter_seen = std::max(max_iter_seen, res.trace.iterations());
        if (!ok && why.empty()) why = probe.pass ? " (first failure: instance " + std::to_string(k) + ")" : probe.worst;
        failed += ok ? 0 : 1;
        ++instances;
    }

    // A driver that ignores the solution: iteration 2 reproduces iteration 1.
    bool exact = true;
    for (int k = 0; k < 5; ++k) {
        const auto lat = random_tree(rng, 4, 1.0);
        const auto bar = random_barrier(rng, lat, false);
        LinearDriverCoefficients c;
        c.c0 = uniform(rng, -1.0, 1.0);
        c.g0 = uniform(rng, -0.5, 0.5);
        const auto data = StochasticLipschitzData::constant(4, 1.0, 0.0, 0.0, 0.0, alpha);
        PicardOptions o;
        o.beta = beta;
        o.tolerance = 1e-300;
        o.max_iter = 3;
        const auto res = picard_solve(lat, linear_driver(c), bar, data, o);
        exact = exact && res.trace.diffs.size() >= 2 && res.trace.diffs[1] == 0.0;
    }

    Verdict v;
    v.pass = failed == 0 && instances >= 10 && max_iter_seen <= 40 && exact;
    v.summary = std::to_string(instances) + " instances, " + std::to_string(failed) + " failures" + why +
                ", max ratio " + fmt("%.3f", worst_ratio) + " (cap " + fmt("%.2f", cap) + "), max iterations " +
                std::to_string(max_iter_seen) + ", decoupled diff at iteration 2 " + (exact ? "exactly 0" : "nonzero");
    return v;
}

// 3. Ordered inputs give ordered solutions; valid hypotheses are never refused.
Verdict comparison() {
    Rng rng(303);
    int pairs = 0, failed = 0, refusals = 0;
    double worst = 0.0;
    for (int k = 0; k < 60; ++k) {
        const int n = pick(rng, 2, 3);
        const double horizon = 0.5;
        const double dt = horizon / n;
        const auto lat = random_tree(rng, n, horizon);
        const auto bar1 = random_barrier(rng, lat, false);
        const auto bar2 = shifted(lat, bar1, rng);

        LinearDriverCoefficients c;
        c.c0 = uniform(rng, -1.0, 1.0);
        c.cy = uniform(rng, -1.0, 1.0);
        c.cz = {uniform(rng, -0.8, 0.8) / std::sqrt(dt)};  // kappa sqrt(dt) <= 0.8
        c.g0 = uniform(rng, -0.3, 0.3);
        c.gy = uniform(rng, -0.4, 0.4);  // g depends on y only
        double sigma = 0.0;
        if (lat.mark_count() == 1) {
            c.cu = {uniform(rng, 0.0, 0.5)};
            sigma = c.cu[0] / std::sqrt(lat.marks()[0].intensity);
        }
        const DriverPair f1 = linear_driver(c);
        const double lift = uniform(rng, 0.0, 0.5);
        DriverPair f2 = f1;
        f2.f = [base = f1.f, lift](const DriverArgs& a) { return base(a) + lift + 0.2 * (1.0 + std::sin(a.y)); };
        const auto data = StochasticLipschitzData::constant(n, std::abs(c.cy) + 0.2, std::abs(c.cz[0]), sigma,
                                                            c.gy * c.gy, 0.25);
        PicardOptions o;
        o.beta = beta_floor(0.5, 0.25).beta0;
        o.tolerance = 1e-26;
        o.max_iter = 400;
        const auto s1 = picard_solve(lat, f1, bar1, data, o).solution;
        const auto s2 = picard_solve(lat, f2, bar2, data, o).solution;
        try {
            const auto rep = check_comparison(lat, s1, s2, {f1, bar1}, {f2, bar2});
            worst = std::max(worst, rep.max_violation);
            failed += rep.pass ? 0 : 1;
        } catch (const HypothesisViolation&) {
            ++refusals;
        }
        ++pairs;
    }
    Verdict v;
    v.pass = failed == 0 && refusals == 0 && pairs >= 50;
    v.summary = std::to_string(pairs) + " ordered pairs, " + std::to_string(failed) + " order violations, " +
                std::to_string(refusals) + " refusals, max violation " + fmt("%.3g", worst);
    return v;
}

// Backward induction without any right-limit stage: Y = max(E[Y'] + f dt + g dB, xi).
std::vector<double> reference_recursion(const ScenarioLattice& lat, const std::vector<double>& f,
                                        const std::vector<double>& g, std::size_t b, const Barrier& bar) {
    std::vector<double> y(lat.node_count());
    const int n = lat.steps();
    const auto bd = static_cast<std::size_t>(lat.b_dim());
    for (NodeId k = lat.layer_begin(n); k < lat.layer_end(n); ++k) y[k] = bar.value(k);
    for (int i = n - 1; i >= 0; --i) {
        for (NodeId k = lat.layer_begin(i); k < lat.layer_end(i); ++k) {
            const auto kids = lat.children(k);
            double mean = 0.0;
            for (std::size_t c = 0; c < kids.size(); ++c) {
                mean += lat.outcome(i, static_cast<int>(c)).probability * y[kids[c]];
            }
            double cont = mean + f[k] * lat.grid().dt(i);
            for (std::size_t c = 0; c < bd; ++c) cont += g[k * bd + c] * lat.b_increment(b, i, static_cast<int>(c));
            y[k] = std::max(cont, bar.value(k));
        }
    }
    return y;
}

// 4. A right-continuous barrier never activates C and reduces to the plain recursion.
Verdict right_continuous_degeneracy() {
    Rng rng(404);
    int fixtures = 0, mismatches = 0, nonzero_c = 0;
    auto check = [&](const ScenarioLattice& lat, const Solution& sol, const Barrier& bar) {
        for (std::size_t b = 0; b < lat.b_path_count(); ++b) {
            const auto& p = sol.paths[b];
            const auto ref = reference_recursion(lat, p.f_used, p.g_used, b, bar);
            mismatches += ref == p.y ? 0 : 1;
            nonzero_c += std::all_of(p.dc.begin(), p.dc.end(), [](double x) { return x == 0.0; }) ? 0 : 1;
            if (!lat.recombining()) {
                const auto cum = cumulative_reflection(lat, p);
                nonzero_c += std::all_of(cum.c.begin(), cum.c.end(), [](double x) { return x == 0.0; }) ? 0 : 1;
            }
        }
        ++fixtures;
    };
    for (int k = 0; k < 20; ++k) {
        const auto lat = random_tree(rng, pick(rng, 1, 4), uniform(rng, 0.5, 2.0));
        const auto bar = random_barrier(rng, lat, true);
        check(lat, solve_decoupled(lat, random_drivers(rng, lat), bar), bar);
    }
    for (int k = 0; k < 5; ++k) {  // coupled solves: compare with the driver values they settled on
        const auto lat = random_tree(rng, 3, 1.0);
        const auto bar = random_barrier(rng, lat, true);
        LinearDriverCoefficients c;
        c.c0 = uniform(rng, -1.0, 1.0);
        c.cy = uniform(rng, -0.5, 0.5);
        c.cz = {uniform(rng, -0.5, 0.5)};
        c.gy = uniform(rng, -0.3, 0.3);
        const auto data = StochasticLipschitzData::constant(3, 0.5, 0.5, 0.0, 0.09, 0.25);
        PicardOptions o;
        o.beta = 6.0;
        o.tolerance = 1e-24;
        check(lat, picard_solve(lat, linear_driver(c), bar, data, o).solution, bar);
    }
    {  // American put: recombining lattice with a payoff barrier
        AmericanClaimConfig c;
        c.s0 = 4.0;
        c.up = 2.0;
        c.down = 0.5;
        c.rate = {0.25};
        c.n_steps = 6;
        c.horizon = 2.0;
        c.strike = 5.0;
        const auto r = price_american(c);
        check(r.lattice, r.solution, r.barrier);
    }
    Verdict v;
    v.pass = mismatches == 0 && nonzero_c == 0;
    v.summary = std::to_string(fixtures) + " right-continuous fixtures, " + std::to_string(mismatches) +
                " b-paths differing from the reference recursion, " + std::to_string(nonzero_c) + " with C != 0";
    return v;
}

// 5. The solution system holds on every solver output of the fixture suite.
Verdict solution_system() {
    const std::set<std::string> names = {"barrier_domination", "terminal_match",    "monotone_reflection",
                                         "skorokhod_kc",       "minimality_kd",     "minimality_c",
                                         "one_step_residual",  "martingale_increment_means"};
    int checked = 0, failed = 0;
    std::string first;
    std::set<std::string> fixtures;
    for (const auto& r : run_verify_suite()) {
        const auto slash = r.name.find('/');
        const std::string check = r.name.substr(slash + 1);
        if (!names.count(check)) continue;
        fixtures.insert(r.name.substr(0, slash));
        ++checked;
        if (!r.pass) {
            ++failed;
            if (first.empty()) first = " (first: " + r.name + ")";
        }
    }
    Verdict v;
    v.pass = failed == 0 && fixtures.size() >= 6;
    v.summary = std::to_string(checked) + " checks over " + std::to_string(fixtures.size()) + " solver outputs, " +
                std::to_string(failed) + " failures" + first;
    return v;
}

// 6. A priori estimate on a perturbed-source family at N = 4, 8, 16.
Verdict apriori_estimate() {
    std::vector<double> violation, ratio;
    bool pass8 = false;
    for (int n : {4, 8, 16}) {
        const auto lat = tree(n, 1.0, {}, "zero");
        const auto data = StochasticLipschitzData::constant(n, 1.0, 0.0, 0.0, 0.0, 0.25);
        const auto zero_bar = [&] {
            BarrierSpec s;
            s.kind = BarrierSpec::Kind::constant;
            return build_barrier(s, lat);
        }();
        const auto bumped_bar = [&] {
            BarrierSpec s;
            s.kind = BarrierSpec::Kind::function;
            s.main_fn = [](const ScenarioLattice& l, NodeId k) {
                return 0.3 * std::sin(2.0 * l.grid().time(l.time_index(k)) + 0.7 * static_cast<double>(k % 5));
            };
            return build_barrier(s, lat);
        }();
        DecoupledInput a{DecoupledDrivers::zero(lat), zero_bar};
        DecoupledInput b{DecoupledDrivers::zero(lat), bumped_bar};
        for (NodeId k = 0; k < lat.node_count(); ++k) {
            b.drivers.f[0][k] = std::sin(0.9 * static_cast<double>(k % 11)) + 0.5 * lat.grid().time(lat.time_index(k));
        }
        const auto s1 = solve_decoupled(lat, a.drivers, a.barrier);
        const auto s2 = solve_decoupled(lat, b.drivers, b.barrier);
        const auto rep = check_apriori(lat, s1, s2, a, b, data, 2.0);
        violation.push_back(rep.max_violation);
        ratio.push_back(rep.params.at("ratio"));
        if (n == 8) pass8 = rep.pass;
    }
    const bool monotone = violation[1] <= violation[0] && violation[2] <= violation[1];
    Verdict v;
    v.pass = pass8 && monotone;
    v.summary = "LHS/RHS at N=4,8,16: " + fmt("%.4f", ratio[0]) + ", " + fmt("%.4f", ratio[1]) + ", " +
                fmt("%.4f", ratio[2]) + "; excess over 1: " + fmt("%.3g", violation[0]) + ", " +
                fmt("%.3g", violation[1]) + ", " + fmt("%.3g", violation[2]) +
                (monotone ? " (non-increasing)" : " (not monotone)");
    return v;
}

// 7. Minimal solution: monotone snapshots, constant snapshots for a Lipschitz
// driver, and the properties of the regularized drivers.
Verdict minimal_solution() {
    const auto lat = tree(3, 0.5, {}, "zero");
    BarrierSpec bs;
    bs.kind = BarrierSpec::Kind::constant;
    bs.c = 2.0;  // high enough that y^2 is steeper than gamma = 1 near the solution
    const auto bar = build_barrier(bs, lat);
    MinimalOptions o;
    o.picard.beta = 6.0;
    o.picard.tolerance = 1e-26;
    o.picard.max_iter = 300;
    o.domain.radius_y = 6.0;
    o.domain.points_y = 121;

    // Truncated quadratic.
    const auto qdata = StochasticLipschitzData::constant(3, 1.0, 0.0, 0.0, 0.0, 0.25, 25.0);
    const DriverPair quad = quadratic_y_driver(25.0);
    o.n_max = 4;
    const auto qres = minimal_solution_solve(lat, quad, bar, qdata, o);
    double order_gap = 0.0;
    for (std::size_t n = 1; n < qres.history.size(); ++n) {
        for (NodeId k = 0; k < lat.node_count(); ++k) {
            order_gap = std::max(order_gap, qres.history[n - 1][0][k] - qres.history[n][0][k]);
        }
    }
    for (NodeId k = 0; k < lat.node_count(); ++k) {
        order_gap = std::max(order_gap, qres.history.back()[0][k] - qres.envelope_y[0][k]);
    }

    // sin with amplitude 3 against gamma = 1: f_n = f from n = 3 on.
    const auto sdata = StochasticLipschitzData::constant(3, 1.0, 0.0, 0.0, 0.0, 0.25, 3.0);
    o.n_max = 5;
    const auto sres = minimal_solution_solve(lat, sine_y_driver(3.0, 1.0), bar, sdata, o);
    bool constant_from_3 = true;
    for (std::size_t n = 3; n < sres.history.size(); ++n) constant_from_3 = constant_from_3 && sres.history[n] == sres.history[2];

    // f_n properties on probe pairs.
    Rng rng(707);
    const auto envelope = growth_envelope(quad, qdata, lat);
    int probe_failures = 0;
    const int probes = 1000;
    double worst_lip = 0.0;
    for (int k = 0; k < probes; ++k) {
        DriverArgs p, q;
        p.node = q.node = static_cast<NodeId>(pick(rng, 0, static_cast<int>(lat.layer_begin(3)) - 1));
        p.step = q.step = lat.time_index(p.node);
        p.t = q.t = lat.grid().time(p.step);
        const std::vector<double> z{0.0};
        p.z = q.z = z;
        p.y = uniform(rng, -4.0, 4.0);
        q.y = uniform(rng, -4.0, 4.0);
        const int n = pick(rng, 1, 6);
        const auto fp = inf_convolution(quad, qdata, lat, n, p, o.domain);
        const auto fq = inf_convolution(quad, qdata, lat, n, q, o.domain);
        const auto fp_next = inf_convolution(quad, qdata, lat, n + 1, p, o.domain);
        const double fval = quad.f(p);
        bool ok = fp.value <= fp_next.value;                            // nondecreasing in n
        ok = ok && fp.value <= fval && std::abs(fp.value) <= envelope.f(p);  // below f, inside the envelope
        const double lip = std::abs(fp.value - fq.value) - n * std::abs(p.y - q.y);
        worst_lip = std::max(worst_lip, lip);
        ok = ok && lip <= std::max(fp.resolution_bound, fq.resolution_bound) + 1e-12;  // n-Lipschitz up to the grid
        probe_failures += ok ? 0 : 1;
    }

    Verdict v;
    v.pass = order_gap <= 1e-10 && constant_from_3 && probe_failures == 0;
    v.summary = "Y0 over n = 1.." + std::to_string(qres.history.size()) + ": " + fmt("%.6f", qres.history.front()[0][0]) +
                " -> " + fmt("%.6f", qres.history.back()[0][0]) + " (envelope " + fmt("%.6f", qres.envelope_y[0][0]) +
                "), order gap " + fmt("%.3g", order_gap) + ", sup gap " + fmt("%.3g", qres.sup_gap) +
                ", Lipschitz-driver snapshots " + (constant_from_3 ? "constant from n=3" : "NOT constant") + ", " +
                std::to_string(probe_failures) + "/" + std::to_string(probes) + " regularization probe failures";
    return v;
}

// 8. American put values and lattice refinement.
Verdict american_claim() {
    const auto t0 = std::chrono::steady_clock::now();
    AmericanClaimConfig c;
    c.s0 = 4.0;
    c.up = 2.0;
    c.down = 0.5;
    c.rate = {0.25};
    c.n_steps = 2;
    c.horizon = 2.0;
    c.strike = 5.0;
    const double v5 = price_american(c).price;
    const double o5 = binomial_american_reference(c);
    c.strike = 6.0;
    const double v6 = price_american(c).price;
    const double o6 = binomial_american_reference(c);

    auto crr = [](int n) {
        AmericanClaimConfig a;
        a.s0 = 100.0;
        a.strike = 100.0;
        a.rate = {0.05};
        a.horizon = 1.0;
        a.n_steps = n;
        a.up = std::exp(0.2 * std::sqrt(1.0 / n));
        a.down = 1.0 / a.up;
        return a;
    };
    const auto r50 = price_american(crr(50));
    const auto r100 = price_american(crr(100));
    const double change = std::abs(r100.price - r50.price) / r50.price;
    const double oracle_gap = std::max(std::abs(r50.price - binomial_american_reference(crr(50))),
                                       std::abs(r100.price - binomial_american_reference(crr(100))));
    const double secs = seconds_since(t0);

    const bool exact = std::abs(v5 - 1.36) <= 1e-12 && std::abs(v6 - 2.0) <= 1e-12 && std::abs(v5 - o5) <= 1e-12 &&
                       std::abs(v6 - o6) <= 1e-12;
    Verdict v;
    v.pass = exact && change < 0.01 && oracle_gap <= 1e-9 && secs < 5.0;
    v.summary = "V0(K=5) " + fmt("%.15g", v5) + ", V0(K=6) " + fmt("%.15g", v6) + ", N=50 " + fmt("%.6f", r50.price) +
                " vs N=100 " + fmt("%.6f", r100.price) + " (change " + fmt("%.3f%%", 100.0 * change) +
                "), max gap to backward induction " + fmt("%.2g", oracle_gap) + ", " + fmt("%.2f s", secs);
    return v;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 9. Two verify_suite runs write identical files.
Verdict determinism() {
    const auto base = std::filesystem::temp_directory_path() / "rbdsde_acceptance_determinism";
    std::filesystem::remove_all(base);
    Overrides o1, o2;
    o1.out_dir = (base / "run1").string();
    o2.out_dir = (base / "run2").string();
    const auto r1 = run_from_file(Mode::verify_suite, "", o1);
    const auto r2 = run_from_file(Mode::verify_suite, "", o2);
    bool same = r1.files == r2.files && !r1.files.empty();
    std::size_t bytes = 0;
    for (const auto& f : r1.files) {
        const auto a = slurp(base / "run1" / f);
        const auto b = slurp(base / "run2" / f);
        same = same && !a.empty() && a == b;
        bytes += a.size();
    }
    std::filesystem::remove_all(base);
    Verdict v;
    v.pass = same;
    v.summary = std::to_string(r1.files.size()) + " report file(s), " + std::to_string(bytes) + " bytes, " +
                (same ? "byte-identical" : "DIFFERENT");
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"snell oracle equivalence", snell_equivalence},
        {"picard contraction", picard_contraction},
        {"comparison", comparison},
        {"right-continuous degeneracy", right_continuous_degeneracy},
        {"solution-system residual", solution_system},
        {"a priori estimate", apriori_estimate},
        {"minimal-solution monotonicity", minimal_solution},
        {"american claim", american_claim},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.summary = std::string("threw: ") + e.what();
        }
        failed += v.pass ? 0 : 1;
        std::printf("[%s] %zu %s: %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), v.summary.c_str());
        std::fflush(stdout);
    }
    return failed;
}
