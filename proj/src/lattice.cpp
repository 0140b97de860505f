#include "lattice.hpp"

#include "errors.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>

namespace rbdsde {

TimeGrid TimeGrid::uniform(double horizon, int steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw PreconditionError("time grid: horizon must be positive and finite");
    }
    if (steps < 1) {
        throw PreconditionError("time grid: at least one step is required");
    }
    std::vector<double> knots(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) {
        knots[static_cast<std::size_t>(i)] = horizon * static_cast<double>(i) / steps;
    }
    knots.back() = horizon;
    return TimeGrid(std::move(knots));
}

TimeGrid TimeGrid::from_knots(std::vector<double> knots) {
    if (knots.size() < 2) {
        throw PreconditionError("time grid: need at least two knots");
    }
    if (knots.front() != 0.0) {
        throw PreconditionError("time grid: first knot must be 0");
    }
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i] > knots[i - 1]) || !std::isfinite(knots[i])) {
            throw PreconditionError("time grid: knots must be strictly increasing (knot " +
                                    std::to_string(i) + ")");
        }
    }
    return TimeGrid(std::move(knots));
}

std::vector<BPath> make_b_paths(const std::string& rule, const TimeGrid& grid) {
    const int n = grid.steps();
    std::vector<BPath> paths;
    if (rule == "zero") {
        BPath p;
        p.increments.assign(static_cast<std::size_t>(n), std::vector<double>{0.0});
        p.probability = 1.0;
        paths.push_back(std::move(p));
        return paths;
    }
    // "binary" = all 2^N sign paths; "binary:k" = k = 2^m paths whose sign at
    // step i is bit (i mod m) of the path index. Every step stays balanced, so
    // each increment keeps mean 0 and variance dt across the family.
    int bits = n;
    if (rule.rfind("binary:", 0) == 0) {
        const auto k = std::stoul(rule.substr(7));
        if (k < 2 || (k & (k - 1)) != 0) {
            throw PreconditionError("b_paths: binary:k needs k a power of two >= 2");
        }
        bits = 0;
        while ((1ul << bits) < k) ++bits;
        if (bits > n) {
            throw PreconditionError("b_paths: binary:k needs k <= 2^n_steps");
        }
    } else if (rule != "binary") {
        throw PreconditionError("b_paths: unknown rule '" + rule + "'");
    }
    if (bits > 20) {
        throw PreconditionError("b_paths: binary family too large; use binary:k");
    }
    const std::size_t count = std::size_t{1} << bits;
    paths.reserve(count);
    for (std::size_t p = 0; p < count; ++p) {
        BPath path;
        path.probability = 1.0 / static_cast<double>(count);
        for (int i = 0; i < n; ++i) {
            const double s = std::sqrt(grid.dt(i));
            const bool up = ((p >> (i % bits)) & 1u) != 0;
            path.increments.push_back({up ? s : -s});
        }
        paths.push_back(std::move(path));
    }
    return paths;
}

namespace {

std::vector<std::pair<double, double>> w_points(int branching, double dt) {
    const double s = std::sqrt(dt);
    if (branching == 2) return {{0.5, s}, {0.5, -s}};
    if (branching == 3) {
        const double h = std::sqrt(3.0 * dt);
        return {{1.0 / 6.0, h}, {2.0 / 3.0, 0.0}, {1.0 / 6.0, -h}};
    }
    throw PreconditionError("lattice: w_branching must be 2 or 3");
}

}  // namespace

ScenarioLattice ScenarioLattice::build(const LatticeConfig& config) {
    ScenarioLattice lat;
    lat.grid_ = config.knots.empty() ? TimeGrid::uniform(config.horizon, config.n_steps)
                                     : TimeGrid::from_knots(config.knots);
    if (!config.knots.empty() && lat.grid_.steps() != config.n_steps) {
        throw PreconditionError("lattice: knots do not match n_steps");
    }
    if (config.w_dim < 1) throw PreconditionError("lattice: w_dim must be >= 1");
    lat.w_dim_ = config.w_dim;
    lat.marks_ = config.marks;
    lat.recombining_ = config.recombining;
    const int n = lat.grid_.steps();

    for (std::size_t e = 0; e < lat.marks_.size(); ++e) {
        if (!(lat.marks_[e].intensity >= 0.0) || !std::isfinite(lat.marks_[e].intensity)) {
            throw PreconditionError("lattice: mark intensity must be finite and >= 0");
        }
    }
    // Outcomes per step: W combinations (coordinate 0 fastest) inside, jump state outside.
    const int per_coord = config.w_branching;
    int w_combos = 1;
    for (int k = 0; k < lat.w_dim_; ++k) w_combos *= per_coord;
    const int jump_states = 1 + lat.mark_count();
    lat.outcome_count_ = w_combos * jump_states;

    lat.outcomes_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double dt = lat.grid_.dt(i);
        const auto pts = w_points(per_coord, dt);
        double total_jump = 0.0;
        for (const auto& m : lat.marks_) {
            if (m.intensity * dt >= 1.0) {
                throw PreconditionError("lattice: lambda(e)*dt = " + std::to_string(m.intensity * dt) +
                                        " >= 1 at step " + std::to_string(i) +
                                        " (at most one jump per step)");
            }
            total_jump += m.intensity * dt;
        }
        if (total_jump >= 1.0) {
            throw PreconditionError("lattice: total jump probability per step must be < 1");
        }
        auto& row = lat.outcomes_[static_cast<std::size_t>(i)];
        for (int j = 0; j < jump_states; ++j) {
            const double pj = j == 0 ? 1.0 - total_jump
                                     : lat.marks_[static_cast<std::size_t>(j - 1)].intensity * dt;
            for (int w = 0; w < w_combos; ++w) {
                Outcome o;
                o.probability = pj;
                o.mark = j - 1;
                int code = w;
                for (int k = 0; k < lat.w_dim_; ++k) {
                    const auto& [p, x] = pts[static_cast<std::size_t>(code % per_coord)];
                    code /= per_coord;
                    o.probability *= p;
                    o.dw.push_back(x);
                }
                row.push_back(std::move(o));
            }
        }
    }

    lat.b_paths_ = config.b_paths.empty() ? make_b_paths(config.b_path_rule, lat.grid_)
                                          : config.b_paths;
    if (lat.b_paths_.empty()) throw PreconditionError("lattice: empty b_path family");
    lat.b_dim_ = static_cast<int>(lat.b_paths_.front().increments.empty()
                                      ? 1
                                      : lat.b_paths_.front().increments.front().size());
    if (lat.b_dim_ < 1) throw PreconditionError("lattice: b_path dimension must be >= 1");
    double bp_total = 0.0;
    for (const auto& p : lat.b_paths_) {
        if (p.increments.size() != static_cast<std::size_t>(n)) {
            throw PreconditionError("lattice: every b_path needs one increment per step");
        }
        for (const auto& inc : p.increments) {
            if (inc.size() != static_cast<std::size_t>(lat.b_dim_)) {
                throw PreconditionError("lattice: inconsistent b_path dimension");
            }
            for (double x : inc) {
                if (!std::isfinite(x)) throw PreconditionError("lattice: non-finite b increment");
            }
        }
        if (!(p.probability > 0.0) || p.probability > 1.0) {
            throw PreconditionError("lattice: b_path probabilities must lie in (0,1]");
        }
        bp_total += p.probability;
    }
    if (std::abs(bp_total - 1.0) > 1e-12) {
        throw PreconditionError("lattice: b_path probabilities must sum to 1");
    }
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < lat.b_dim_; ++c) {
            double mean = 0.0;
            for (const auto& p : lat.b_paths_) {
                mean += p.probability *
                        p.increments[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
            }
            if (std::abs(mean) > 1e-12) {
                throw PreconditionError("lattice: b increments must have mean 0 at step " +
                                        std::to_string(i));
            }
        }
    }

    // Nodes, layer by layer. Non-terminal nodes precede terminal ones, so node
    // n < layer_begin(N) owns children slots [n*K, n*K + K).
    const auto K = static_cast<std::size_t>(lat.outcome_count_);
    lat.layer_offset_.push_back(0);
    lat.time_.push_back(0);
    lat.parent_.push_back(0);
    lat.parent_outcome_.push_back(-1);
    lat.node_prob_.push_back(1.0);
    lat.layer_offset_.push_back(1);

    // Recombining key: how often each outcome index has occurred.
    std::vector<std::vector<int>> state{std::vector<int>(K, 0)};
    for (int i = 0; i < n; ++i) {
        const NodeId begin = lat.layer_offset_[static_cast<std::size_t>(i)];
        const NodeId end = lat.layer_offset_[static_cast<std::size_t>(i) + 1];
        std::map<std::vector<int>, NodeId> seen;
        for (NodeId node = begin; node < end; ++node) {
            for (std::size_t k = 0; k < K; ++k) {
                const double p = lat.outcomes_[static_cast<std::size_t>(i)][k].probability;
                NodeId child;
                std::vector<int> key;
                if (lat.recombining_) {
                    key = state[node];
                    ++key[k];
                    auto it = seen.find(key);
                    if (it != seen.end()) {
                        child = it->second;
                        lat.node_prob_[child] += lat.node_prob_[node] * p;
                        lat.children_.push_back(child);
                        continue;
                    }
                }
                child = lat.time_.size();
                if (child >= config.max_nodes) {
                    throw PreconditionError("lattice: node budget exceeded (" +
                                            std::to_string(config.max_nodes) + ")");
                }
                lat.time_.push_back(i + 1);
                lat.parent_.push_back(node);
                lat.parent_outcome_.push_back(static_cast<int>(k));
                lat.node_prob_.push_back(lat.node_prob_[node] * p);
                lat.children_.push_back(child);
                if (lat.recombining_) {
                    seen.emplace(key, child);
                    state.push_back(std::move(key));
                }
            }
        }
        lat.layer_offset_.push_back(lat.time_.size());
    }
    return lat;
}

std::span<const NodeId> ScenarioLattice::children(NodeId n) const {
    if (is_terminal(n)) return {};
    const auto K = static_cast<std::size_t>(outcome_count_);
    return std::span<const NodeId>(children_).subspan(n * K, K);
}

double ScenarioLattice::compensated_jump(int step, int k, int mark) const {
    const double dt = grid_.dt(step);
    const double ind = outcome(step, k).mark == mark ? 1.0 : 0.0;
    return ind - marks_[static_cast<std::size_t>(mark)].intensity * dt;
}

double conditional_expectation(const ScenarioLattice& lattice, std::span<const double> values,
                               NodeId node) {
    if (node >= lattice.node_count()) {
        throw PreconditionError("conditional_expectation: node out of range");
    }
    if (lattice.is_terminal(node)) {
        throw PreconditionError("conditional_expectation: terminal node has no children");
    }
    const int step = lattice.time_index(node);
    const auto kids = lattice.children(node);
    double sum = 0.0;
    for (std::size_t k = 0; k < kids.size(); ++k) {
        if (kids[k] >= values.size() || std::isnan(values[kids[k]])) {
            throw PreconditionError("conditional_expectation: missing value for child " +
                                    std::to_string(kids[k]) + " of node " + std::to_string(node));
        }
        sum += lattice.outcome(step, static_cast<int>(k)).probability * values[kids[k]];
    }
    return sum;
}

std::vector<std::uint8_t> StoppingRule::decisions(const ScenarioLattice& lattice) const {
    std::vector<std::uint8_t> d(lattice.node_count(), 0);
    for (NodeId n : stop_nodes) d[n] = 1;
    return d;
}

std::vector<int> StoppingRule::stopping_index(const ScenarioLattice& lattice) const {
    const auto d = decisions(lattice);
    const int n = lattice.steps();
    std::vector<int> out;
    for (NodeId leaf = lattice.layer_begin(n); leaf < lattice.layer_end(n); ++leaf) {
        int idx = -1;
        NodeId cur = leaf;
        while (true) {
            if (d[cur]) idx = lattice.time_index(cur);
            if (lattice.time_index(cur) == 0) break;
            cur = lattice.parent(cur);
        }
        out.push_back(idx);
    }
    return out;
}

std::vector<StoppingRule> enumerate_stopping_rules(const ScenarioLattice& lattice,
                                                   std::size_t b_path_index,
                                                   std::size_t atom_budget, NodeId from) {
    if (lattice.recombining()) {
        throw PreconditionError("enumerate_stopping_rules: requires a non-recombining tree");
    }
    if (b_path_index >= lattice.b_path_count()) {
        throw PreconditionError("enumerate_stopping_rules: b_path index out of range");
    }
    if (from >= lattice.node_count()) {
        throw PreconditionError("enumerate_stopping_rules: start node out of range");
    }
    // Atoms in the subtree below `from`.
    std::size_t atoms = 0;
    std::size_t width = 1;
    for (int i = lattice.time_index(from); i <= lattice.steps(); ++i) {
        atoms += width;
        if (atoms > atom_budget) {
            throw BudgetExceeded("enumerate_stopping_rules: tree has more than " +
                                 std::to_string(atom_budget) + " atoms");
        }
        width *= static_cast<std::size_t>(lattice.outcome_count());
    }

    // rules(node) = {stop at node} U (continue x product of rules(child)).
    std::function<std::vector<std::vector<NodeId>>(NodeId)> rules = [&](NodeId node) {
        std::vector<std::vector<NodeId>> out{{node}};
        if (lattice.is_terminal(node)) return out;
        std::vector<std::vector<NodeId>> acc{{}};
        for (NodeId child : lattice.children(node)) {
            const auto sub = rules(child);
            std::vector<std::vector<NodeId>> next;
            next.reserve(acc.size() * sub.size());
            for (const auto& a : acc) {
                for (const auto& s : sub) {
                    auto merged = a;
                    merged.insert(merged.end(), s.begin(), s.end());
                    next.push_back(std::move(merged));
                }
            }
            acc = std::move(next);
        }
        for (auto& a : acc) out.push_back(std::move(a));
        return out;
    };

    std::vector<StoppingRule> result;
    for (auto& set : rules(from)) {
        result.push_back(StoppingRule{b_path_index, std::move(set)});
    }
    return result;
}

}  // namespace rbdsde
