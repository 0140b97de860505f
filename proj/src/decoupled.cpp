#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rbdsde {

namespace {

// Weighted least-squares projector for one step. Every node of a layer shares
// the same branch set, so the Gram matrix is factored once per step.
class StepProjector {
public:
    StepProjector(const ScenarioLattice& lattice, int step)
        : d_(lattice.w_dim()), m_(lattice.mark_count()), k_(lattice.outcome_count()) {
        const int p = d_ + m_;
        x_.assign(static_cast<std::size_t>(k_ * p), 0.0);
        prob_.resize(static_cast<std::size_t>(k_));
        for (int k = 0; k < k_; ++k) {
            const Outcome& o = lattice.outcome(step, k);
            prob_[k] = o.probability;
            for (int c = 0; c < d_; ++c) x_[k * p + c] = o.dw[c];
            for (int e = 0; e < m_; ++e) x_[k * p + d_ + e] = lattice.compensated_jump(step, k, e);
        }
        mu_.assign(static_cast<std::size_t>(p), 0.0);
        for (int k = 0; k < k_; ++k) {
            for (int a = 0; a < p; ++a) mu_[a] += prob_[k] * x_[k * p + a];
        }
        lu_.assign(static_cast<std::size_t>(p * p), 0.0);
        for (int k = 0; k < k_; ++k) {
            for (int a = 0; a < p; ++a) {
                for (int b = 0; b < p; ++b) {
                    lu_[a * p + b] += prob_[k] * (x_[k * p + a] - mu_[a]) * (x_[k * p + b] - mu_[b]);
                }
            }
        }
        factor();
    }

    bool singular() const { return singular_; }

    MartingaleComponents project(std::span<const double> branch_values) const {
        const int p = d_ + m_;
        MartingaleComponents mc;
        for (int k = 0; k < k_; ++k) mc.mean += prob_[k] * branch_values[k];
        std::vector<double> rhs(static_cast<std::size_t>(p), 0.0);
        for (int k = 0; k < k_; ++k) {
            for (int a = 0; a < p; ++a) rhs[a] += prob_[k] * (x_[k * p + a] - mu_[a]) * branch_values[k];
        }
        const auto coef = solve(rhs);
        mc.z.assign(coef.begin(), coef.begin() + d_);
        mc.u.assign(coef.begin() + d_, coef.end());
        mc.residual.resize(static_cast<std::size_t>(k_));
        for (int k = 0; k < k_; ++k) {
            double r = branch_values[k] - mc.mean;
            for (int a = 0; a < p; ++a) r -= coef[a] * x_[k * p + a];
            mc.residual[k] = r;
        }
        return mc;
    }

private:
    void factor() {
        const int p = d_ + m_;
        piv_.resize(static_cast<std::size_t>(p));
        double scale = 0.0;
        for (double v : lu_) scale = std::max(scale, std::abs(v));
        for (int c = 0; c < p; ++c) {
            int best = c;
            for (int r = c + 1; r < p; ++r) {
                if (std::abs(lu_[r * p + c]) > std::abs(lu_[best * p + c])) best = r;
            }
            piv_[c] = best;
            if (best != c) {
                for (int j = 0; j < p; ++j) std::swap(lu_[c * p + j], lu_[best * p + j]);
            }
            const double pivot = lu_[c * p + c];
            if (!(std::abs(pivot) > 1e-14 * std::max(scale, 1e-300))) {
                singular_ = true;
                return;
            }
            for (int r = c + 1; r < p; ++r) {
                const double l = lu_[r * p + c] / pivot;
                lu_[r * p + c] = l;
                for (int j = c + 1; j < p; ++j) lu_[r * p + j] -= l * lu_[c * p + j];
            }
        }
    }

    std::vector<double> solve(std::vector<double> b) const {
        const int p = d_ + m_;
        for (int c = 0; c < p; ++c) {
            if (piv_[c] != c) std::swap(b[c], b[piv_[c]]);
        }
        for (int r = 0; r < p; ++r) {
            for (int j = 0; j < r; ++j) b[r] -= lu_[r * p + j] * b[j];
        }
        for (int r = p - 1; r >= 0; --r) {
            for (int j = r + 1; j < p; ++j) b[r] -= lu_[r * p + j] * b[j];
            b[r] /= lu_[r * p + r];
        }
        return b;
    }

    int d_, m_, k_;
    std::vector<double> x_, prob_, mu_, lu_;
    std::vector<int> piv_;
    bool singular_ = false;
};

std::vector<StepProjector> build_projectors(const ScenarioLattice& lattice) {
    std::vector<StepProjector> out;
    out.reserve(static_cast<std::size_t>(lattice.steps()));
    for (int i = 0; i < lattice.steps(); ++i) out.emplace_back(lattice, i);
    return out;
}

const StepProjector& checked(const std::vector<StepProjector>& projectors, int step, NodeId node) {
    const auto& p = projectors[static_cast<std::size_t>(step)];
    if (p.singular()) {
        throw NumericError("martingale projection: singular branch design at node " +
                           std::to_string(node) + " (time " + std::to_string(step) + ")");
    }
    return p;
}

void check_driver_fields(const ScenarioLattice& lattice, const DecoupledDrivers& drivers) {
    const std::size_t nodes = lattice.node_count();
    const auto bd = static_cast<std::size_t>(lattice.b_dim());
    if (drivers.f.size() != lattice.b_path_count() || drivers.g.size() != lattice.b_path_count()) {
        throw PreconditionError("solve_decoupled: driver fields need one entry per b-path");
    }
    for (std::size_t b = 0; b < drivers.f.size(); ++b) {
        if (drivers.f[b].size() != nodes || drivers.g[b].size() != nodes * bd) {
            throw PreconditionError("solve_decoupled: driver field length mismatch");
        }
    }
}

PathFields collect(const Solution& s, std::vector<double> PathSolution::*field) {
    PathFields out;
    out.reserve(s.paths.size());
    for (const auto& p : s.paths) out.push_back(p.*field);
    return out;
}

}  // namespace

PathFields Solution::y() const { return collect(*this, &PathSolution::y); }
PathFields Solution::z() const { return collect(*this, &PathSolution::z); }
PathFields Solution::u() const { return collect(*this, &PathSolution::u); }

Solution zero_solution(const ScenarioLattice& lattice) {
    const std::size_t nodes = lattice.node_count();
    const std::size_t branches =
        lattice.layer_begin(lattice.steps()) * static_cast<std::size_t>(lattice.outcome_count());
    Solution s;
    s.w_dim = lattice.w_dim();
    s.mark_count = lattice.mark_count();
    s.b_dim = lattice.b_dim();
    PathSolution p;
    p.y.assign(nodes, 0.0);
    p.y_plus.assign(nodes, 0.0);
    p.z.assign(nodes * static_cast<std::size_t>(s.w_dim), 0.0);
    p.u.assign(nodes * static_cast<std::size_t>(s.mark_count), 0.0);
    p.dk_c.assign(nodes, 0.0);
    p.dk_d.assign(nodes, 0.0);
    p.dc.assign(nodes, 0.0);
    p.orth.assign(branches, 0.0);
    p.f_used.assign(nodes, 0.0);
    p.g_used.assign(nodes * static_cast<std::size_t>(s.b_dim), 0.0);
    s.paths.assign(lattice.b_path_count(), p);
    return s;
}

DecoupledDrivers DecoupledDrivers::zero(const ScenarioLattice& lattice) {
    DecoupledDrivers d;
    d.f.assign(lattice.b_path_count(), std::vector<double>(lattice.node_count(), 0.0));
    d.g.assign(lattice.b_path_count(),
               std::vector<double>(lattice.node_count() * static_cast<std::size_t>(lattice.b_dim()), 0.0));
    return d;
}

CumulativeReflection cumulative_reflection(const ScenarioLattice& lattice, const PathSolution& path) {
    if (lattice.recombining()) {
        throw PreconditionError("cumulative_reflection: cumulative K and C are path-dependent on a recombining lattice");
    }
    const std::size_t nodes = lattice.node_count();
    CumulativeReflection r;
    r.k.assign(nodes, 0.0);
    r.k_d.assign(nodes, 0.0);
    r.c.assign(nodes, 0.0);
    r.c[0] = path.dc[0];
    for (NodeId n = 1; n < nodes; ++n) {
        const NodeId p = lattice.parent(n);
        r.k[n] = r.k[p] + path.dk_c[p] + path.dk_d[p];
        r.k_d[n] = r.k_d[p] + path.dk_d[p];
        r.c[n] = r.c[p] + path.dc[n];
    }
    return r;
}

MartingaleComponents extract_martingale_components(const ScenarioLattice& lattice,
                                                   std::span<const double> next_values,
                                                   NodeId node) {
    if (node >= lattice.node_count() || lattice.is_terminal(node)) {
        throw PreconditionError("extract_martingale_components: node must be non-terminal");
    }
    if (next_values.size() != lattice.node_count()) {
        throw PreconditionError("extract_martingale_components: values must be node-indexed");
    }
    const int step = lattice.time_index(node);
    const auto kids = lattice.children(node);
    std::vector<double> branch(kids.size());
    for (std::size_t c = 0; c < kids.size(); ++c) {
        branch[c] = next_values[kids[c]];
        if (std::isnan(branch[c])) {
            throw PreconditionError("extract_martingale_components: missing value at node " +
                                    std::to_string(kids[c]));
        }
    }
    StepProjector proj(lattice, step);
    if (proj.singular()) {
        throw NumericError("martingale projection: singular branch design at node " +
                           std::to_string(node) + " (time " + std::to_string(step) + ")");
    }
    return proj.project(branch);
}

Solution solve_decoupled(const ScenarioLattice& lattice, const DecoupledDrivers& drivers,
                         const Barrier& barrier) {
    barrier.validate(lattice);
    check_driver_fields(lattice, drivers);
    const auto projectors = build_projectors(lattice);
    const int n = lattice.steps();
    const int d = lattice.w_dim();
    const int m = lattice.mark_count();
    const int bd = lattice.b_dim();
    const int kcount = lattice.outcome_count();

    Solution sol = zero_solution(lattice);
    std::vector<double> branch(static_cast<std::size_t>(kcount));
    for (std::size_t b = 0; b < lattice.b_path_count(); ++b) {
        PathSolution& ps = sol.paths[b];
        ps.f_used = drivers.f[b];
        ps.g_used = drivers.g[b];
        for (NodeId k = lattice.layer_begin(n); k < lattice.layer_end(n); ++k) {
            ps.y[k] = barrier.value(k);
            ps.y_plus[k] = barrier.value(k);
        }
        for (int i = n - 1; i >= 0; --i) {
            const double dt = lattice.grid().dt(i);
            const bool next_predictable = barrier.predictable_at(i + 1);
            for (NodeId node = lattice.layer_begin(i); node < lattice.layer_end(i); ++node) {
                const auto kids = lattice.children(node);
                for (int c = 0; c < kcount; ++c) branch[c] = ps.y[kids[c]];
                const MartingaleComponents mc = checked(projectors, i, node).project(branch);

                double cont = mc.mean + ps.f_used[node] * dt;
                for (int c = 0; c < bd; ++c) {
                    cont += ps.g_used[node * bd + c] * lattice.b_increment(b, i, c);
                }
                const double yp = std::max(cont, barrier.right_limit(node));
                const double yv = std::max(yp, barrier.value(node));
                ps.y_plus[node] = yp;
                ps.y[node] = yv;
                (next_predictable ? ps.dk_d : ps.dk_c)[node] = yp - cont;
                ps.dc[node] = yv - yp;
                for (int c = 0; c < d; ++c) ps.z[node * d + c] = mc.z[c];
                for (int e = 0; e < m; ++e) ps.u[node * m + e] = mc.u[e];
                for (int c = 0; c < kcount; ++c) ps.orth[node * kcount + c] = mc.residual[c];
            }
        }
    }
    return sol;
}

MertensDecomposition mertens_split(const ScenarioLattice& lattice, const PathFields& ytilde,
                                   const PathFields& ytilde_right,
                                   const std::vector<bool>& predictable_times, double tolerance) {
    const std::size_t nodes = lattice.node_count();
    const int n = lattice.steps();
    const int kcount = lattice.outcome_count();
    if (ytilde.size() != lattice.b_path_count()) {
        throw PreconditionError("mertens_split: need one field per b-path");
    }
    if (!ytilde_right.empty() && ytilde_right.size() != ytilde.size()) {
        throw PreconditionError("mertens_split: right values need one field per b-path");
    }
    if (predictable_times.size() != static_cast<std::size_t>(n) + 1) {
        throw PreconditionError("mertens_split: predictable flags need N+1 entries");
    }
    MertensDecomposition md;
    const NodeId nonterminal = lattice.layer_begin(n);
    for (std::size_t b = 0; b < ytilde.size(); ++b) {
        const auto& y = ytilde[b];
        const auto& yr = ytilde_right.empty() ? y : ytilde_right[b];
        if (y.size() != nodes || yr.size() != nodes) {
            throw PreconditionError("mertens_split: field length mismatch");
        }
        std::vector<double> dn(nonterminal * static_cast<std::size_t>(kcount), 0.0);
        std::vector<double> dk(nodes, 0.0), dkd(nodes, 0.0), dc(nodes, 0.0);
        for (NodeId node = 0; node < nodes; ++node) {
            const int i = lattice.time_index(node);
            dc[node] = y[node] - yr[node];
            if (dc[node] < -tolerance) {
                throw PreconditionError("mertens_split: right value exceeds value at node " +
                                        std::to_string(node) + " (not a supermartingale)");
            }
            if (lattice.is_terminal(node)) continue;
            const double mean = conditional_expectation(lattice, y, node);
            const double push = yr[node] - mean;
            if (push < -tolerance) {
                throw PreconditionError("mertens_split: conditional expectation exceeds value at node " +
                                        std::to_string(node) + " (not a supermartingale)");
            }
            (predictable_times[static_cast<std::size_t>(i) + 1] ? dkd : dk)[node] = push;
            const auto kids = lattice.children(node);
            for (int c = 0; c < kcount; ++c) dn[node * kcount + c] = y[kids[c]] - mean;
        }
        // dk holds the K^c part so far; expose the total.
        for (NodeId node = 0; node < nodes; ++node) dk[node] += dkd[node];

        if (!lattice.recombining()) {
            std::vector<double> kc(nodes, 0.0), cc(nodes, 0.0), nn(nodes, 0.0);
            cc[0] = dc[0];
            nn[0] = y[0];
            for (NodeId node = 1; node < nodes; ++node) {
                const NodeId p = lattice.parent(node);
                kc[node] = kc[p] + dk[p];
                cc[node] = cc[p] + dc[node];
                nn[node] = nn[p] + dn[p * kcount + static_cast<std::size_t>(lattice.parent_outcome(node))];
            }
            md.n.push_back(std::move(nn));
            md.k.push_back(std::move(kc));
            md.c.push_back(std::move(cc));
        }
        md.dn.push_back(std::move(dn));
        md.dk.push_back(std::move(dk));
        md.dk_d.push_back(std::move(dkd));
        md.dc.push_back(std::move(dc));
    }
    return md;
}

}  // namespace rbdsde
