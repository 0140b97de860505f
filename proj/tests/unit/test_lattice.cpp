#include "errors.hpp"
#include "fixtures.hpp"
#include "lattice.hpp"

#include <doctest.h>

#include <cmath>

using namespace rbdsde;
using rbdsde::testing::tree;

TEST_CASE("time grid") {
    const auto g = TimeGrid::uniform(2.0, 4);
    CHECK(g.steps() == 4);
    CHECK(g.dt(0) == doctest::Approx(0.5));
    CHECK(g.horizon() == 2.0);
    CHECK_THROWS_AS(TimeGrid::from_knots({0.0, 0.5, 0.5}), PreconditionError);
    CHECK_THROWS_AS(TimeGrid::from_knots({0.1, 0.5}), PreconditionError);
    CHECK_THROWS_AS(TimeGrid::uniform(1.0, 0), PreconditionError);
}

TEST_CASE("binary tree without marks") {
    const auto lat = tree(3);
    CHECK(lat.node_count() == 15);
    CHECK(lat.outcome_count() == 2);
    CHECK(lat.layer_begin(3) == 7);
    double total = 0.0;
    for (NodeId k = lat.layer_begin(3); k < lat.layer_end(3); ++k) total += lat.node_probability(k);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(lat.outcome(0, 0).dw[0] > 0.0);
    CHECK(lat.outcome(0, 1).dw[0] < 0.0);
}

TEST_CASE("one mark gives categorical outcome probabilities") {
    const auto lat = tree(1, 1.0, {{0.5, 0.1}});
    REQUIRE(lat.outcome_count() == 4);
    CHECK(lat.outcome(0, 0).probability == doctest::Approx(0.45));
    CHECK(lat.outcome(0, 1).probability == doctest::Approx(0.45));
    CHECK(lat.outcome(0, 2).probability == doctest::Approx(0.05));
    CHECK(lat.outcome(0, 3).probability == doctest::Approx(0.05));
    CHECK(lat.outcome(0, 2).mark == 0);
    CHECK(lat.compensated_jump(0, 2, 0) == doctest::Approx(0.9));
    CHECK(lat.compensated_jump(0, 0, 0) == doctest::Approx(-0.1));
    double mean = 0.0;
    for (int k = 0; k < 4; ++k) mean += lat.outcome(0, k).probability * lat.compensated_jump(0, k, 0);
    CHECK(std::abs(mean) < 1e-16);
}

TEST_CASE("jump intensity must keep per-step probability below one") {
    CHECK_THROWS_AS(tree(1, 1.0, {{0.5, 1.0}}), PreconditionError);
    CHECK_THROWS_AS(tree(2, 1.0, {{0.5, 1.2}, {1.0, 1.0}}), PreconditionError);
}

TEST_CASE("trinomial moments") {
    LatticeConfig c;
    c.n_steps = 1;
    c.horizon = 0.25;
    c.w_branching = 3;
    c.b_path_rule = "zero";
    const auto lat = ScenarioLattice::build(c);
    double m1 = 0.0, m2 = 0.0, psum = 0.0;
    for (int k = 0; k < lat.outcome_count(); ++k) {
        const auto& o = lat.outcome(0, k);
        psum += o.probability;
        m1 += o.probability * o.dw[0];
        m2 += o.probability * o.dw[0] * o.dw[0];
    }
    CHECK(psum == doctest::Approx(1.0));
    CHECK(std::abs(m1) < 1e-16);
    CHECK(m2 == doctest::Approx(0.25));
}

TEST_CASE("recombining lattice merges nodes") {
    LatticeConfig c;
    c.n_steps = 3;
    c.recombining = true;
    c.b_path_rule = "zero";
    const auto lat = ScenarioLattice::build(c);
    CHECK(lat.node_count() == 10);
    CHECK(lat.node_probability(lat.layer_begin(3) + 1) == doctest::Approx(0.375));
}

TEST_CASE("b-path families") {
    const auto g = TimeGrid::uniform(1.0, 3);
    const auto all = make_b_paths("binary", g);
    CHECK(all.size() == 8);
    CHECK(all[0].probability == doctest::Approx(0.125));
    const auto two = make_b_paths("binary:2", g);
    REQUIRE(two.size() == 2);
    for (int i = 0; i < 3; ++i) CHECK(two[0].increments[i][0] + two[1].increments[i][0] == 0.0);
    CHECK(make_b_paths("zero", g).size() == 1);
    CHECK_THROWS_AS(make_b_paths("binary:3", g), PreconditionError);
    CHECK_THROWS_AS(make_b_paths("gaussian", g), PreconditionError);

    LatticeConfig c;
    c.n_steps = 1;
    c.b_paths = {BPath{{{1.0}}, 0.5}, BPath{{{0.0}}, 0.5}};
    CHECK_THROWS_AS(ScenarioLattice::build(c), PreconditionError);
}

TEST_CASE("conditional expectation") {
    const auto lat = tree(1);
    std::vector<double> v{0.0, 4.0, 2.0};
    CHECK(conditional_expectation(lat, v, 0) == 3.0);
    v[2] = NAN;
    CHECK_THROWS_AS(conditional_expectation(lat, v, 0), PreconditionError);
    CHECK_THROWS_AS(conditional_expectation(lat, v, 1), PreconditionError);
}

TEST_CASE("stopping rule enumeration counts distinct rules") {
    CHECK(enumerate_stopping_rules(tree(1), 0).size() == 2);
    CHECK(enumerate_stopping_rules(tree(2), 0).size() == 5);
    CHECK(enumerate_stopping_rules(tree(3), 0).size() == 26);
    CHECK(enumerate_stopping_rules(tree(2, 1.0, {{0.5, 0.1}}), 0).size() == 17);

    const auto lat = tree(2);
    const auto leaf_rules = enumerate_stopping_rules(lat, 0, kDefaultAtomBudget, lat.layer_begin(2));
    CHECK(leaf_rules.size() == 1);

    for (const auto& r : enumerate_stopping_rules(lat, 0)) {
        const auto idx = r.stopping_index(lat);
        CHECK(idx.size() == 4);
    }
    CHECK_THROWS_AS(enumerate_stopping_rules(tree(6), 0), BudgetExceeded);
    CHECK_NOTHROW(enumerate_stopping_rules(tree(3, 1.0, {{0.5, 0.1}}), 0, 128));
}
