#include "coefficients.hpp"
#include "errors.hpp"
#include "fixtures.hpp"
#include "solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace rbdsde;
using rbdsde::testing::constant_barrier;
using rbdsde::testing::table_barrier;
using rbdsde::testing::tree;

namespace {

PicardOptions options(double beta, double tol = 1e-12) {
    PicardOptions o;
    o.beta = beta;
    o.tolerance = tol;
    o.max_iter = 200;
    return o;
}

}  // namespace

TEST_CASE("constant barrier with zero drivers") {
    const auto lat = tree(3);
    const auto sol = solve_decoupled(lat, DecoupledDrivers::zero(lat), constant_barrier(lat, 1.5));
    for (double y : sol.paths[0].y) CHECK(y == 1.5);
    for (double z : sol.paths[0].z) CHECK(z == 0.0);
    for (double k : sol.paths[0].dk_c) CHECK(k == 0.0);
    for (double c : sol.paths[0].dc) CHECK(c == 0.0);
}

TEST_CASE("one step: reflection lands in K without a right jump") {
    const auto lat = tree(1);
    const auto sol = solve_decoupled(lat, DecoupledDrivers::zero(lat), table_barrier(lat, {2.5, 1.0, 3.0}));
    const auto& p = sol.paths[0];
    CHECK(p.y[1] == 1.0);
    CHECK(p.y[2] == 3.0);
    CHECK(p.y[0] == 2.5);
    CHECK(p.dk_c[0] == 0.5);
    CHECK(p.dc[0] == 0.0);
    CHECK(p.z[0] == -1.0);
    const auto cum = cumulative_reflection(lat, p);
    CHECK(cum.k[1] == 0.5);
    CHECK(cum.c[1] == 0.0);
}

TEST_CASE("one step: declared right jump sends the second stage to C") {
    const auto lat = tree(1);
    const auto bar = table_barrier(lat, {2.5, 1.0, 3.0}, {2.0, 1.0, 3.0});
    const auto sol = solve_decoupled(lat, DecoupledDrivers::zero(lat), bar);
    const auto& p = sol.paths[0];
    CHECK(p.y_plus[0] == 2.0);
    CHECK(p.y[0] == 2.5);
    CHECK(p.dc[0] == 0.5);
    CHECK(p.dk_c[0] == 0.0);
    CHECK(p.dk_d[0] == 0.0);
    CHECK(validate_solution(lat, sol, bar).pass);
}

TEST_CASE("flagged predictable time routes first-stage mass to K^d") {
    const auto lat = tree(1);
    const auto bar = table_barrier(lat, {2.5, 1.0, 3.0}, {}, {1});
    const auto sol = solve_decoupled(lat, DecoupledDrivers::zero(lat), bar);
    CHECK(sol.paths[0].dk_d[0] == 0.5);
    CHECK(sol.paths[0].dk_c[0] == 0.0);
    CHECK(validate_solution(lat, sol, bar).pass);
}

TEST_CASE("martingale components") {
    SUBCASE("constant values") {
        const auto lat = tree(1, 1.0, {{0.5, 0.2}});
        std::vector<double> v(lat.node_count(), 4.0);
        const auto mc = extract_martingale_components(lat, v, 0);
        CHECK(mc.z[0] == 0.0);
        CHECK(mc.u[0] == 0.0);
        CHECK(mc.mean == doctest::Approx(4.0));
    }
    SUBCASE("identity on the W increment") {
        const auto lat = tree(1, 0.3);
        std::vector<double> v{0.0, lat.outcome(0, 0).dw[0], lat.outcome(0, 1).dw[0]};
        const auto mc = extract_martingale_components(lat, v, 0);
        CHECK(mc.z[0] == 1.0);
        CHECK(mc.residual[0] == 0.0);
    }
    SUBCASE("identity on the compensated jump") {
        const auto lat = tree(1, 1.0, {{0.5, 0.1}});
        std::vector<double> v(lat.node_count(), 0.0);
        const auto kids = lat.children(0);
        for (int k = 0; k < 4; ++k) v[kids[k]] = lat.compensated_jump(0, k, 0);
        const auto mc = extract_martingale_components(lat, v, 0);
        CHECK(mc.u[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(mc.z[0]) < 1e-14);
    }
    SUBCASE("terminal node rejected") {
        const auto lat = tree(1);
        std::vector<double> v(3, 0.0);
        CHECK_THROWS_AS(extract_martingale_components(lat, v, 1), PreconditionError);
    }
    SUBCASE("zero-intensity mark makes the design singular") {
        const auto lat = tree(1, 1.0, {{0.5, 0.0}});
        std::vector<double> v(lat.node_count(), 1.0);
        CHECK_THROWS_AS(extract_martingale_components(lat, v, 0), NumericError);
    }
}

TEST_CASE("Mertens split") {
    SUBCASE("deterministic supermartingale") {
        const auto lat = tree(2);
        PathFields y{{3, 2, 2, 2, 2, 2, 2}};
        const auto md = mertens_split(lat, y, {}, {false, false, false});
        for (NodeId k = 0; k < 7; ++k) CHECK(md.n[0][k] == 3.0);
        CHECK(md.k[0][0] == 0.0);
        CHECK(md.k[0][1] == 1.0);
        CHECK(md.k[0][3] == 1.0);
        for (double c : md.c[0]) CHECK(c == 0.0);
    }
    SUBCASE("martingale input") {
        const auto lat = tree(1);
        PathFields y{{1, 2, 0}};
        const auto md = mertens_split(lat, y, {}, {false, false});
        CHECK(md.dk[0][0] == 0.0);
        CHECK(md.n[0][1] == 2.0);
        CHECK(md.n[0][2] == 0.0);
    }
    SUBCASE("right jump at t0") {
        const auto lat = tree(1);
        PathFields y{{3, 2, 2}}, yr{{2, 2, 2}};
        const auto md = mertens_split(lat, y, yr, {false, false});
        CHECK(md.c[0][0] == 1.0);
        CHECK(md.k[0][1] == 0.0);
        CHECK(md.n[0][0] == 3.0);
        CHECK(md.n[0][1] == 3.0);
    }
    SUBCASE("submartingale rejected") {
        const auto lat = tree(1);
        PathFields y{{1, 2, 2}};
        CHECK_THROWS_AS(mertens_split(lat, y, {}, {false, false}), PreconditionError);
    }
}

TEST_CASE("Picard with decoupled drivers stops at iteration 2 with zero difference") {
    const auto lat = tree(3, 1.0, {{0.3, 0.5}}, "binary");
    LinearDriverCoefficients c;
    c.c0 = 0.7;
    c.g0 = 0.2;
    const auto data = StochasticLipschitzData::constant(3, 0.5, 0.5, 0.5, 0.0, 0.25);
    const auto bar = constant_barrier(lat, 0.4);
    const auto res = picard_solve(lat, linear_driver(c), bar, data, options(17.0 / 3.0));
    REQUIRE(res.trace.iterations() == 2);
    CHECK(res.trace.diffs[1] == 0.0);
    CHECK(res.trace.converged);

    auto direct_drivers = DecoupledDrivers::zero(lat);
    for (auto& f : direct_drivers.f) std::fill(f.begin(), f.end(), 0.7);
    for (auto& g : direct_drivers.g) std::fill(g.begin(), g.end(), 0.2);
    const auto direct = solve_decoupled(lat, direct_drivers, bar);
    for (std::size_t b = 0; b < lat.b_path_count(); ++b) CHECK(direct.paths[b].y == res.solution.paths[b].y);
}

TEST_CASE("Picard contraction for f = 0.3 y") {
    const auto lat = tree(4, 1.0, {}, "binary:2");
    LinearDriverCoefficients c;
    c.cy = 0.3;
    const auto data = StochasticLipschitzData::constant(4, 0.3, 0.0, 0.0, 0.0, 0.25);
    const auto bar = table_barrier(lat, [&] {
        std::vector<double> v(lat.node_count());
        for (NodeId k = 0; k < v.size(); ++k) v[k] = std::sin(static_cast<double>(k));
        for (NodeId k = 0; k < v.size(); ++k) v[k] = std::max(v[k], 0.0) + 0.5;
        return v;
    }());
    const auto res = picard_solve(lat, linear_driver(c), bar, data, options(17.0 / 3.0));
    CHECK(res.trace.converged);
    for (std::size_t k = 1; k < res.trace.ratios.size(); ++k) CHECK(res.trace.ratios[k] <= 0.8);

    auto lift = options(17.0 / 3.0);
    lift.start = PicardOptions::Start::barrier_lift;
    const auto res2 = picard_solve(lat, linear_driver(c), bar, data, lift);
    for (NodeId k = 0; k < lat.node_count(); ++k) {
        CHECK(std::abs(res.solution.paths[0].y[k] - res2.solution.paths[0].y[k]) <= 1e-5);
    }
    const auto rep = validate_solution(lat, res.solution, bar, nullptr);
    CHECK(rep.pass);
    const DriverPair pair = linear_driver(c);
    const auto with_driver = validate_solution(lat, res.solution, bar, &pair);
    CHECK(with_driver.find("driver_consistency")->pass);
}

TEST_CASE("Picard preconditions") {
    const auto lat = tree(2);
    const auto data = StochasticLipschitzData::constant(2, 1.0, 0.0, 0.0, 0.0, 0.2);
    const auto bar = constant_barrier(lat, 0.0);
    auto o = options(17.0 / 3.0);
    o.epsilon = 0.9;
    CHECK_THROWS_AS(picard_solve(lat, zero_driver(), bar, data, o), PreconditionError);
    CHECK_THROWS_AS(picard_solve(lat, quadratic_y_driver(25.0), bar, data, options(6.0)),
                    PreconditionError);
    CHECK_THROWS_AS(picard_solve(lat, zero_driver(), bar, data, options(0.0)), PreconditionError);
    const auto low = picard_solve(lat, zero_driver(), bar, data, options(1.0));
    CHECK(low.trace.beta_below_floor);
}

TEST_CASE("validate flags a corrupted K off the contact set") {
    const auto lat = tree(3, 1.0, {{0.2, 0.4}});
    std::vector<double> xi(lat.node_count());
    for (NodeId k = 0; k < xi.size(); ++k) xi[k] = std::cos(0.7 * static_cast<double>(k));
    const auto bar = table_barrier(lat, xi);
    auto drivers = DecoupledDrivers::zero(lat);
    for (auto& f : drivers.f) std::fill(f.begin(), f.end(), 0.3);
    auto sol = solve_decoupled(lat, drivers, bar);
    REQUIRE(validate_solution(lat, sol, bar).pass);

    NodeId target = lat.node_count();
    for (NodeId k = 0; k < lat.layer_begin(3); ++k) {
        if (sol.paths[0].y_plus[k] > bar.right_limit(k)) {
            target = k;
            break;
        }
    }
    REQUIRE(target < lat.node_count());
    sol.paths[0].dk_c[target] += 0.1;
    const auto rep = validate_solution(lat, sol, bar);
    CHECK_FALSE(rep.pass);
    const auto* sk = rep.find("skorokhod_kc");
    REQUIRE(sk != nullptr);
    CHECK_FALSE(sk->pass);
    CHECK(sk->node == static_cast<long>(target));
}

TEST_CASE("right-continuous barrier gives C identically zero") {
    const auto lat = tree(3, 1.0, {}, "binary");
    const auto bar = constant_barrier(lat, 0.2);
    LinearDriverCoefficients c;
    c.cy = -0.5;
    c.g0 = 0.3;
    const auto data = StochasticLipschitzData::constant(3, 0.5, 0.0, 0.0, 0.0, 0.25);
    const auto res = picard_solve(lat, linear_driver(c), bar, data, options(6.0));
    const auto rep = validate_solution(lat, res.solution, bar);
    CHECK(rep.find("c_zero_right_continuous")->pass);
    CHECK(rep.find("c_zero_right_continuous")->max_violation == 0.0);
}

TEST_CASE("minimal solution") {
    const auto lat = tree(4, 0.5);
    const auto bar = constant_barrier(lat, 0.5);
    MinimalOptions o;
    o.picard = options(6.0, 1e-26);
    o.picard.max_iter = 300;
    o.domain.radius_y = 6.0;
    o.domain.points_y = 121;

    SUBCASE("truncated quadratic is monotone and below the envelope") {
        const auto data = StochasticLipschitzData::constant(4, 1.0, 0.0, 0.0, 0.0, 0.25, 25.0);
        o.n_max = 4;
        const auto res = minimal_solution_solve(lat, quadratic_y_driver(25.0), bar, data, o);
        REQUIRE(res.history.size() == 4);
        for (std::size_t n = 1; n < 4; ++n) {
            for (NodeId k = 0; k < lat.node_count(); ++k) CHECK(res.history[n][0][k] >= res.history[n - 1][0][k] - 1e-10);
        }
        CHECK(res.history.back()[0][0] < res.envelope_y[0][0]);
        CHECK(res.sup_gap >= 0.0);
    }
    SUBCASE("already Lipschitz driver gives constant snapshots") {
        const auto data = StochasticLipschitzData::constant(4, 1.0, 0.0, 0.0, 0.0, 0.25, 3.0);
        o.n_max = 5;
        const auto res = minimal_solution_solve(lat, sine_y_driver(3.0, 1.0), bar, data, o);
        for (std::size_t n = 3; n < 5; ++n) CHECK(res.history[n] == res.history[2]);
    }
    SUBCASE("n_max = 1") {
        const auto data = StochasticLipschitzData::constant(4, 1.0, 0.0, 0.0, 0.0, 0.25, 25.0);
        o.n_max = 1;
        const auto res = minimal_solution_solve(lat, quadratic_y_driver(25.0), bar, data, o);
        CHECK(res.history.size() == 1);
        CHECK(res.sup_gap == 0.0);
    }
}
