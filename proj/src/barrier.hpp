#pragma once

#include "lattice.hpp"

#include <functional>
#include <vector>

namespace rbdsde {

/// Irregular barrier on the lattice: main value xi_i and right value xi_{i+}
/// per node, right jumps only at declared grid times, predictable left-jump
/// flags per time index.
class Barrier {
public:
    Barrier() = default;
    Barrier(std::vector<double> main, std::vector<double> right, std::vector<bool> right_jump_times,
            std::vector<bool> predictable_times);

    double value(NodeId node) const { return main_[node]; }
    /// xi_{i+}; equals xi_T at terminal nodes.
    double right_limit(NodeId node) const { return right_[node]; }
    bool right_jump_at(int time_index) const {
        return right_jump_times_[static_cast<std::size_t>(time_index)];
    }
    bool predictable_at(int time_index) const {
        return predictable_times_[static_cast<std::size_t>(time_index)];
    }
    bool right_continuous() const;

    std::span<const double> main() const noexcept { return main_; }
    std::span<const double> right() const noexcept { return right_; }
    const std::vector<bool>& right_jump_times() const noexcept { return right_jump_times_; }
    const std::vector<bool>& predictable_times() const noexcept { return predictable_times_; }

    /// Throws unless sizes match `lattice` and the right-USC rendering holds.
    void validate(const ScenarioLattice& lattice) const;

private:
    std::vector<double> main_;
    std::vector<double> right_;
    std::vector<bool> right_jump_times_;
    std::vector<bool> predictable_times_;
};

struct BarrierSpec {
    enum class Kind { constant, put_payoff, deterministic_sequence, table, function };
    Kind kind = Kind::constant;

    double c = 0.0;  // constant

    double strike = 0.0;  // put_payoff on the geometric walk below
    double s0 = 1.0;
    double up = 1.1;
    double down = 0.9;

    std::vector<double> values;        // per time index (sequence) or per node (table)
    std::vector<double> right_values;  // same indexing; empty = right-continuous
    std::function<double(const ScenarioLattice&, NodeId)> main_fn;   // function
    std::function<double(const ScenarioLattice&, NodeId)> right_fn;  // optional

    std::vector<int> predictable_times;  // time indices in 1..N
};

Barrier build_barrier(const BarrierSpec& spec, const ScenarioLattice& lattice);

/// S at every node of a geometric walk: S_root = s0, multiplied by `up` on a
/// positive first W-coordinate increment, by `down` on a negative one (1 on a
/// zero trinomial move), and by (1 + mark value) on a jump.
std::vector<double> geometric_walk(const ScenarioLattice& lattice, double s0, double up, double down);

struct BarrierSummary {
    std::vector<int> right_jump_times;
    std::vector<double> max_right_jump;  // max_i (xi_i - xi_{i+}) at each reported time
    std::vector<int> predictable_times;
};

BarrierSummary summarize(const Barrier& barrier, const ScenarioLattice& lattice);

}  // namespace rbdsde
