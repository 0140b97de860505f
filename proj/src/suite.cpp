#include "suite.hpp"

#include "american.hpp"
#include "barrier.hpp"
#include "coefficients.hpp"
#include "lattice.hpp"
#include "solver.hpp"
#include "verify.hpp"

#include <cmath>
#include <string>

namespace rbdsde {

namespace {

ScenarioLattice tree(int n, double horizon, std::vector<JumpMark> marks, const std::string& rule) {
    LatticeConfig c;
    c.n_steps = n;
    c.horizon = horizon;
    c.marks = std::move(marks);
    c.b_path_rule = rule;
    return ScenarioLattice::build(c);
}

Barrier table(const ScenarioLattice& lat, std::vector<double> main, std::vector<double> right = {},
              std::vector<int> predictable = {}) {
    BarrierSpec s;
    s.kind = BarrierSpec::Kind::table;
    s.values = std::move(main);
    s.right_values = std::move(right);
    s.predictable_times = std::move(predictable);
    return build_barrier(s, lat);
}

Barrier constant(const ScenarioLattice& lat, double c) {
    BarrierSpec s;
    s.kind = BarrierSpec::Kind::constant;
    s.c = c;
    return build_barrier(s, lat);
}

// A wiggly barrier with right jumps at the given times (right value lowered
// by a node-dependent amount).
Barrier irregular(const ScenarioLattice& lat, std::vector<int> jump_times, std::vector<int> predictable) {
    std::vector<double> main(lat.node_count()), right(lat.node_count());
    for (NodeId k = 0; k < main.size(); ++k) {
        main[k] = 0.6 * std::cos(1.3 * static_cast<double>(k)) + 0.2;
        right[k] = main[k];
    }
    for (int t : jump_times) {
        for (NodeId k = lat.layer_begin(t); k < lat.layer_end(t); ++k) {
            right[k] = main[k] - 0.25 - 0.1 * static_cast<double>(k % 3);
        }
    }
    return table(lat, main, right, predictable);
}

DecoupledDrivers source_drivers(const ScenarioLattice& lat, double f_scale, double g_scale) {
    auto d = DecoupledDrivers::zero(lat);
    for (std::size_t b = 0; b < lat.b_path_count(); ++b) {
        for (NodeId k = 0; k < lat.node_count(); ++k) {
            d.f[b][k] = f_scale * std::sin(0.9 * static_cast<double>(k) + static_cast<double>(b));
            for (int c = 0; c < lat.b_dim(); ++c) {
                d.g[b][k * static_cast<std::size_t>(lat.b_dim()) + c] =
                    g_scale * std::cos(0.4 * static_cast<double>(k));
            }
        }
    }
    return d;
}

void append(std::vector<CheckReport>& out, const std::string& fixture, CheckReport r) {
    r.name = fixture + "/" + r.name;
    out.push_back(std::move(r));
}

void append_validation(std::vector<CheckReport>& out, const std::string& fixture,
                       const ValidationReport& v) {
    for (const auto& c : v.checks) append(out, fixture, c);
}

CheckReport equality(const std::string& name, double got, double want, double tol) {
    CheckReport r;
    r.name = name;
    r.tolerance = tol;
    r.params["value"] = got;
    r.params["expected"] = want;
    r.max_violation = std::abs(got - want);
    r.finish();
    return r;
}

PicardOptions picard_options(double beta, double tol) {
    PicardOptions o;
    o.beta = beta;
    o.tolerance = tol;
    o.max_iter = 200;
    return o;
}

}  // namespace

std::vector<CheckReport> run_verify_suite() {
    std::vector<CheckReport> out;

    {  // one-step reflection without and with a right jump
        const auto lat = tree(1, 1.0, {}, "zero");
        const auto plain = table(lat, {2.5, 1.0, 3.0});
        const auto jump = table(lat, {2.5, 1.0, 3.0}, {2.0, 1.0, 3.0});
        const auto zero = DecoupledDrivers::zero(lat);
        append(out, "one_step", snell_oracle(lat, zero, plain, 0));
        append_validation(out, "one_step", validate_solution(lat, solve_decoupled(lat, zero, plain), plain));
        const auto sj = solve_decoupled(lat, zero, jump);
        append(out, "one_step_right_jump", equality("c_increment", sj.paths[0].dc[0], 0.5, 0.0));
        append_validation(out, "one_step_right_jump", validate_solution(lat, sj, jump));
    }

    {  // irregular barrier with jumps, two b-paths, right jumps and a predictable time
        const auto lat = tree(3, 1.0, {{0.3, 0.4}}, "binary:2");
        const auto bar = irregular(lat, {1, 2}, {2});
        const auto drv = source_drivers(lat, 0.4, 0.3);
        for (std::size_t b = 0; b < lat.b_path_count(); ++b) {
            append(out, "irregular_b" + std::to_string(b), snell_oracle(lat, drv, bar, b, 128));
        }
        append_validation(out, "irregular", validate_solution(lat, solve_decoupled(lat, drv, bar), bar));
    }

    {  // coupled linear driver: contraction, validation, uniqueness across starts
        const auto lat = tree(4, 1.0, {{0.2, 0.5}}, "binary:2");
        LinearDriverCoefficients c;
        c.cy = 0.3;
        c.cz = {0.2};
        c.cu = {0.1};
        c.gy = 0.1;
        const DriverPair pair = linear_driver(c);
        const auto data = StochasticLipschitzData::constant(4, 0.3, 0.2, 0.1, 0.02, 0.25);
        const auto bar = irregular(lat, {2}, {3});
        const double beta = beta_floor(0.5, 0.25).beta0;
        const auto res = picard_solve(lat, pair, bar, data, picard_options(beta, 1e-20));
        append(out, "picard_linear", check_contraction(res.trace, 0.5, 0.25));
        append_validation(out, "picard_linear", validate_solution(lat, res.solution, bar, &pair));
        auto lift = picard_options(beta, 1e-20);
        lift.start = PicardOptions::Start::barrier_lift;
        const auto res2 = picard_solve(lat, pair, bar, data, lift);
        CheckReport u;
        u.name = "uniqueness_across_starts";
        u.tolerance = 10.0 * std::sqrt(1e-20);
        for (std::size_t b = 0; b < lat.b_path_count(); ++b) {
            for (NodeId k = 0; k < lat.node_count(); ++k) {
                u.observe(std::abs(res.solution.paths[b].y[k] - res2.solution.paths[b].y[k]),
                          static_cast<long>(b), static_cast<long>(k), lat.time_index(k));
            }
        }
        u.finish();
        append(out, "picard_linear", u);
    }

    {  // right-continuous barrier: no C at all
        const auto lat = tree(3, 1.0, {{0.5, 0.3}}, "binary");
        const auto bar = irregular(lat, {}, {});
        const auto sol = solve_decoupled(lat, source_drivers(lat, 0.5, 0.2), bar);
        append_validation(out, "right_continuous", validate_solution(lat, sol, bar));
    }

    {  // a priori estimate on a perturbed source
        const auto lat = tree(8, 1.0, {}, "zero");
        const auto data = StochasticLipschitzData::constant(8, 1.0, 0.0, 0.0, 0.0, 0.25);
        DecoupledInput a{DecoupledDrivers::zero(lat), constant(lat, 0.0)};
        DecoupledInput b{source_drivers(lat, 1.0, 0.0), constant(lat, 0.0)};
        const auto s1 = solve_decoupled(lat, a.drivers, a.barrier);
        const auto s2 = solve_decoupled(lat, b.drivers, b.barrier);
        append(out, "apriori_n8", check_apriori(lat, s1, s2, a, b, data, 2.0));
    }

    {  // American put: oracle values and strike comparison
        AmericanClaimConfig c;
        c.s0 = 4.0;
        c.up = 2.0;
        c.down = 0.5;
        c.rate = {0.25};
        c.n_steps = 2;
        c.horizon = 2.0;
        c.strike = 5.0;
        const auto r5 = price_american(c);
        append(out, "american_k5", equality("price_vs_binomial", r5.price, binomial_american_reference(c), 1e-12));
        append(out, "american_k5", equality("price_vs_hand_value", r5.price, 1.36, 1e-12));
        append_validation(out, "american_k5", validate_solution(r5.lattice, r5.solution, r5.barrier));
        c.strike = 6.0;
        const auto r6 = price_american(c);
        append(out, "american_k6", equality("price_vs_binomial", r6.price, binomial_american_reference(c), 1e-12));
        append(out, "american_k6", equality("price_vs_hand_value", r6.price, 2.0, 1e-12));
        DriverPair f;
        f.f = [](const DriverArgs& a) { return -0.25 * a.y; };
        append(out, "american_k5_k6",
               check_comparison(r5.lattice, r5.solution, r6.solution, {f, r5.barrier}, {f, r6.barrier}));
    }

    {  // minimal solution for a truncated quadratic driver
        const auto lat = tree(3, 0.5, {}, "zero");
        const auto bar = constant(lat, 0.5);
        const auto data = StochasticLipschitzData::constant(3, 1.0, 0.0, 0.0, 0.0, 0.25, 25.0);
        MinimalOptions o;
        o.picard = picard_options(6.0, 1e-26);
        o.picard.max_iter = 300;
        o.n_max = 3;
        const auto res = minimal_solution_solve(lat, quadratic_y_driver(25.0), bar, data, o);
        CheckReport m;
        m.name = "monotone_snapshots";
        m.tolerance = 1e-10;
        for (std::size_t n = 1; n < res.history.size(); ++n) {
            for (NodeId k = 0; k < lat.node_count(); ++k) {
                m.observe(res.history[n - 1][0][k] - res.history[n][0][k], 0, static_cast<long>(k),
                          lat.time_index(k));
            }
        }
        for (NodeId k = 0; k < lat.node_count(); ++k) {
            m.observe(res.history.back()[0][k] - res.envelope_y[0][k], 0, static_cast<long>(k), lat.time_index(k));
        }
        m.params["sup_gap"] = res.sup_gap;
        m.finish();
        append(out, "minimal_quadratic", m);
        append_validation(out, "minimal_quadratic", validate_solution(lat, res.solution, bar));
    }
    return out;
}

}  // namespace rbdsde
