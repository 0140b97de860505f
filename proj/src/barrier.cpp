#include "barrier.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rbdsde {

Barrier::Barrier(std::vector<double> main, std::vector<double> right,
                 std::vector<bool> right_jump_times, std::vector<bool> predictable_times)
    : main_(std::move(main)),
      right_(std::move(right)),
      right_jump_times_(std::move(right_jump_times)),
      predictable_times_(std::move(predictable_times)) {}

bool Barrier::right_continuous() const {
    return std::none_of(right_jump_times_.begin(), right_jump_times_.end(), [](bool b) { return b; });
}

void Barrier::validate(const ScenarioLattice& lattice) const {
    const auto n = static_cast<std::size_t>(lattice.steps());
    if (main_.size() != lattice.node_count() || right_.size() != lattice.node_count()) {
        throw PreconditionError("barrier: value arrays do not match the lattice node count");
    }
    if (right_jump_times_.size() != n + 1 || predictable_times_.size() != n + 1) {
        throw PreconditionError("barrier: time flags must have N+1 entries");
    }
    if (predictable_times_[0]) {
        throw PreconditionError("barrier: t_0 cannot carry a predictable left jump");
    }
    for (NodeId node = 0; node < lattice.node_count(); ++node) {
        const double m = main_[node];
        const double r = right_[node];
        if (!std::isfinite(m) || !std::isfinite(r)) {
            throw PreconditionError("barrier: non-finite value at node " + std::to_string(node));
        }
        const int i = lattice.time_index(node);
        if (lattice.is_terminal(node) && r != m) {
            throw PreconditionError("barrier: right value at T must equal xi_T");
        }
        if (!right_jump_times_[static_cast<std::size_t>(i)] && r != m) {
            throw PreconditionError("barrier: right value differs from main value at node " +
                                    std::to_string(node) + " outside a declared right-jump time");
        }
        if (r > m) {
            throw PreconditionError("barrier: xi_{i+} > xi_i at node " + std::to_string(node) +
                                    " (time " + std::to_string(i) +
                                    ") violates right upper semi-continuity");
        }
    }
}

std::vector<double> geometric_walk(const ScenarioLattice& lattice, double s0, double up,
                                   double down) {
    std::vector<double> s(lattice.node_count(), s0);
    for (NodeId node = 1; node < lattice.node_count(); ++node) {
        const NodeId p = lattice.parent(node);
        const Outcome& o = lattice.outcome(lattice.time_index(p), lattice.parent_outcome(node));
        double factor = o.dw[0] > 0.0 ? up : (o.dw[0] < 0.0 ? down : 1.0);
        if (o.mark >= 0) factor *= 1.0 + lattice.marks()[static_cast<std::size_t>(o.mark)].value;
        s[node] = s[p] * factor;
    }
    return s;
}

Barrier build_barrier(const BarrierSpec& spec, const ScenarioLattice& lattice) {
    const std::size_t nodes = lattice.node_count();
    const auto n = static_cast<std::size_t>(lattice.steps());
    std::vector<double> main(nodes), right(nodes);

    switch (spec.kind) {
        case BarrierSpec::Kind::constant:
            std::fill(main.begin(), main.end(), spec.c);
            right = main;
            break;
        case BarrierSpec::Kind::put_payoff: {
            const auto s = geometric_walk(lattice, spec.s0, spec.up, spec.down);
            for (NodeId k = 0; k < nodes; ++k) main[k] = std::max(spec.strike - s[k], 0.0);
            right = main;
            break;
        }
        case BarrierSpec::Kind::deterministic_sequence: {
            if (spec.values.size() != n + 1) {
                throw PreconditionError("barrier: deterministic_sequence needs N+1 values");
            }
            if (!spec.right_values.empty() && spec.right_values.size() != n + 1) {
                throw PreconditionError("barrier: right_values needs N+1 entries");
            }
            for (NodeId k = 0; k < nodes; ++k) {
                const auto i = static_cast<std::size_t>(lattice.time_index(k));
                main[k] = spec.values[i];
                right[k] = spec.right_values.empty() ? main[k] : spec.right_values[i];
            }
            break;
        }
        case BarrierSpec::Kind::table:
            if (spec.values.size() != nodes) {
                throw PreconditionError("barrier: table needs one value per lattice node");
            }
            if (!spec.right_values.empty() && spec.right_values.size() != nodes) {
                throw PreconditionError("barrier: table right_values needs one value per node");
            }
            main = spec.values;
            right = spec.right_values.empty() ? main : spec.right_values;
            break;
        case BarrierSpec::Kind::function:
            if (!spec.main_fn) throw PreconditionError("barrier: function spec without main_fn");
            for (NodeId k = 0; k < nodes; ++k) {
                main[k] = spec.main_fn(lattice, k);
                right[k] = spec.right_fn ? spec.right_fn(lattice, k) : main[k];
            }
            break;
    }

    // A right jump is declared wherever a right value differs from its main value.
    std::vector<bool> jumps(n + 1, false), predictable(n + 1, false);
    for (NodeId k = 0; k < nodes; ++k) {
        if (right[k] != main[k]) jumps[static_cast<std::size_t>(lattice.time_index(k))] = true;
    }
    for (int t : spec.predictable_times) {
        if (t < 1 || static_cast<std::size_t>(t) > n) {
            throw PreconditionError("barrier: predictable times must lie in 1..N");
        }
        predictable[static_cast<std::size_t>(t)] = true;
    }
    Barrier b(std::move(main), std::move(right), std::move(jumps), std::move(predictable));
    b.validate(lattice);
    return b;
}

BarrierSummary summarize(const Barrier& barrier, const ScenarioLattice& lattice) {
    BarrierSummary s;
    for (int i = 0; i <= lattice.steps(); ++i) {
        if (barrier.right_jump_at(i)) {
            double big = 0.0;
            for (NodeId k = lattice.layer_begin(i); k < lattice.layer_end(i); ++k) {
                big = std::max(big, barrier.value(k) - barrier.right_limit(k));
            }
            s.right_jump_times.push_back(i);
            s.max_right_jump.push_back(big);
        }
        if (barrier.predictable_at(i)) s.predictable_times.push_back(i);
    }
    return s;
}

}  // namespace rbdsde
