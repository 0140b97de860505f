#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rbdsde {

using NodeId = std::size_t;

/// Knots 0 = t_0 < t_1 < ... < t_N = T.
class TimeGrid {
public:
    static TimeGrid uniform(double horizon, int steps);
    static TimeGrid from_knots(std::vector<double> knots);

    int steps() const noexcept { return static_cast<int>(knots_.size()) - 1; }
    double horizon() const noexcept { return knots_.back(); }
    double time(int i) const { return knots_.at(static_cast<std::size_t>(i)); }
    double dt(int i) const { return time(i + 1) - time(i); }
    std::span<const double> knots() const noexcept { return knots_; }

private:
    explicit TimeGrid(std::vector<double> knots) : knots_(std::move(knots)) {}
    std::vector<double> knots_;
};

struct JumpMark {
    double value = 0.0;
    double intensity = 0.0;  // lambda(e)
};

/// One complete realisation of the backward Brownian motion B.
struct BPath {
    std::vector<std::vector<double>> increments;  // [step][coordinate]
    double probability = 1.0;
};

struct LatticeConfig {
    int n_steps = 1;
    double horizon = 1.0;
    std::vector<double> knots;  // optional; overrides the uniform grid
    int w_dim = 1;
    int w_branching = 2;  // per coordinate: 2 (+-sqrt(dt)) or 3 (trinomial)
    std::vector<JumpMark> marks;
    std::vector<BPath> b_paths;         // explicit family; wins over b_path_rule
    std::string b_path_rule = "binary"; // "zero", "binary", "binary:k"
    bool recombining = false;
    std::size_t max_nodes = 4'000'000;
};

/// One branch of a one-step transition. Identical for every node of a layer.
struct Outcome {
    double probability = 0.0;
    std::vector<double> dw;  // size w_dim
    int mark = -1;           // -1: no jump
};

std::vector<BPath> make_b_paths(const std::string& rule, const TimeGrid& grid);

/// Finite probability space for the doubly stochastic setting: a forward
/// W/jump tree (or recombining DAG) shared by every B-path of a finite family.
/// The B-path is always conditioned on, never averaged, inside a solve.
class ScenarioLattice {
public:
    static ScenarioLattice build(const LatticeConfig& config);

    const TimeGrid& grid() const noexcept { return grid_; }
    int steps() const noexcept { return grid_.steps(); }
    int w_dim() const noexcept { return w_dim_; }
    int mark_count() const noexcept { return static_cast<int>(marks_.size()); }
    int b_dim() const noexcept { return b_dim_; }
    bool recombining() const noexcept { return recombining_; }

    std::span<const JumpMark> marks() const noexcept { return marks_; }
    std::span<const BPath> b_paths() const noexcept { return b_paths_; }
    std::size_t b_path_count() const noexcept { return b_paths_.size(); }
    double b_increment(std::size_t b, int step, int coord) const {
        return b_paths_[b].increments[static_cast<std::size_t>(step)][static_cast<std::size_t>(coord)];
    }

    std::size_t node_count() const noexcept { return time_.size(); }
    std::size_t root() const noexcept { return 0; }
    int outcome_count() const noexcept { return outcome_count_; }
    NodeId layer_begin(int i) const { return layer_offset_.at(static_cast<std::size_t>(i)); }
    NodeId layer_end(int i) const { return layer_offset_.at(static_cast<std::size_t>(i) + 1); }

    int time_index(NodeId n) const { return time_[n]; }
    bool is_terminal(NodeId n) const { return time_[n] == steps(); }
    /// First parent in construction order (the unique parent on a tree).
    NodeId parent(NodeId n) const { return parent_[n]; }
    int parent_outcome(NodeId n) const { return parent_outcome_[n]; }
    std::span<const NodeId> children(NodeId n) const;
    double node_probability(NodeId n) const { return node_prob_[n]; }

    const Outcome& outcome(int step, int k) const {
        return outcomes_[static_cast<std::size_t>(step)][static_cast<std::size_t>(k)];
    }
    /// 1{jump with mark e} - lambda(e) dt on branch k of `step`.
    double compensated_jump(int step, int k, int mark) const;

private:
    ScenarioLattice() : grid_(TimeGrid::uniform(1.0, 1)) {}

    TimeGrid grid_;
    int w_dim_ = 1;
    int b_dim_ = 1;
    bool recombining_ = false;
    int outcome_count_ = 0;
    std::vector<JumpMark> marks_;
    std::vector<BPath> b_paths_;
    std::vector<std::vector<Outcome>> outcomes_;  // [step][branch]
    std::vector<int> time_;
    std::vector<NodeId> parent_;
    std::vector<int> parent_outcome_;
    std::vector<NodeId> children_;  // non-terminal node n owns [n*K, n*K + K)
    std::vector<double> node_prob_;
    std::vector<NodeId> layer_offset_;
};

/// Probability-weighted sum of `values` (indexed by node id) over the
/// children of `node`. Throws if a child value is missing or NaN.
double conditional_expectation(const ScenarioLattice& lattice,
                               std::span<const double> values, NodeId node);

/// Adapted stop/continue rule on the W/jump tree of one b-path. Stored as the
/// set of nodes where the rule stops; every root-to-leaf path meets exactly
/// one of them.
struct StoppingRule {
    std::size_t b_path = 0;
    std::vector<NodeId> stop_nodes;

    /// Per-node decision: 1 = stop here, 0 = continue or unreachable.
    std::vector<std::uint8_t> decisions(const ScenarioLattice& lattice) const;
    /// Stopping time index seen by each leaf scenario (indexed by leaf order).
    std::vector<int> stopping_index(const ScenarioLattice& lattice) const;
};

inline constexpr std::size_t kDefaultAtomBudget = 64;

/// All distinct adapted stopping rules started at `from` (default: the root).
/// Desk-scale oracle support: refuses trees with more than `atom_budget` atoms.
std::vector<StoppingRule> enumerate_stopping_rules(const ScenarioLattice& lattice,
                                                   std::size_t b_path_index,
                                                   std::size_t atom_budget = kDefaultAtomBudget,
                                                   NodeId from = 0);

}  // namespace rbdsde
