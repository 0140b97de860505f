#pragma once

#include "barrier.hpp"
#include "lattice.hpp"

#include <vector>

namespace rbdsde::testing {

inline ScenarioLattice tree(int n, double horizon = 1.0, std::vector<JumpMark> marks = {},
                            const std::string& b_rule = "zero") {
    LatticeConfig c;
    c.n_steps = n;
    c.horizon = horizon;
    c.marks = std::move(marks);
    c.b_path_rule = b_rule;
    return ScenarioLattice::build(c);
}

inline Barrier table_barrier(const ScenarioLattice& lat, std::vector<double> main,
                             std::vector<double> right = {}, std::vector<int> predictable = {}) {
    BarrierSpec s;
    s.kind = BarrierSpec::Kind::table;
    s.values = std::move(main);
    s.right_values = std::move(right);
    s.predictable_times = std::move(predictable);
    return build_barrier(s, lat);
}

inline Barrier constant_barrier(const ScenarioLattice& lat, double c) {
    BarrierSpec s;
    s.kind = BarrierSpec::Kind::constant;
    s.c = c;
    return build_barrier(s, lat);
}

}  // namespace rbdsde::testing
