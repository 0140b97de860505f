#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rbdsde {

const CheckReport* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

CheckReport make(const std::string& name, double tolerance) {
    CheckReport r;
    r.name = name;
    r.tolerance = tolerance;
    return r;
}

void check_shapes(const ScenarioLattice& lattice, const Solution& s) {
    const std::size_t nodes = lattice.node_count();
    const std::size_t branches =
        lattice.layer_begin(lattice.steps()) * static_cast<std::size_t>(lattice.outcome_count());
    if (s.paths.size() != lattice.b_path_count()) {
        throw PreconditionError("validate_solution: solution has the wrong number of b-paths");
    }
    for (const auto& p : s.paths) {
        const bool ok = p.y.size() == nodes && p.y_plus.size() == nodes &&
                        p.z.size() == nodes * static_cast<std::size_t>(lattice.w_dim()) &&
                        p.u.size() == nodes * static_cast<std::size_t>(lattice.mark_count()) &&
                        p.dk_c.size() == nodes && p.dk_d.size() == nodes && p.dc.size() == nodes &&
                        p.orth.size() == branches && p.f_used.size() == nodes &&
                        p.g_used.size() == nodes * static_cast<std::size_t>(lattice.b_dim());
        if (!ok) throw PreconditionError("validate_solution: solution is incomplete for this lattice");
    }
}

// Y~ = Y + accumulated f dt + g dB along the path; a supermartingale whose
// Mertens increments must reproduce the stored reflection.
void mertens_check(const ScenarioLattice& lattice, const Solution& s, const Barrier& barrier,
                   double tol, CheckReport& rep) {
    const std::size_t nodes = lattice.node_count();
    const int bd = lattice.b_dim();
    PathFields yt, ytr;
    for (std::size_t b = 0; b < s.paths.size(); ++b) {
        const auto& p = s.paths[b];
        std::vector<double> acc(nodes, 0.0);
        for (NodeId n = 1; n < nodes; ++n) {
            const NodeId q = lattice.parent(n);
            const int i = lattice.time_index(q);
            double inc = p.f_used[q] * lattice.grid().dt(i);
            for (int c = 0; c < bd; ++c) inc += p.g_used[q * bd + c] * lattice.b_increment(b, i, c);
            acc[n] = acc[q] + inc;
        }
        std::vector<double> a(nodes), ar(nodes);
        for (NodeId n = 0; n < nodes; ++n) {
            a[n] = p.y[n] + acc[n];
            ar[n] = p.y_plus[n] + acc[n];
        }
        yt.push_back(std::move(a));
        ytr.push_back(std::move(ar));
    }
    MertensDecomposition md;
    try {
        md = mertens_split(lattice, yt, ytr, barrier.predictable_times(), 1e3 * tol);
    } catch (const std::exception& e) {
        rep.max_violation = INFINITY;
        rep.detail = e.what();
        return;
    }
    for (std::size_t b = 0; b < s.paths.size(); ++b) {
        const auto& p = s.paths[b];
        for (NodeId n = 0; n < nodes; ++n) {
            const int t = lattice.time_index(n);
            const double v = std::max({std::abs(md.dk[b][n] - (p.dk_c[n] + p.dk_d[n])),
                                       std::abs(md.dk_d[b][n] - p.dk_d[n]),
                                       std::abs(md.dc[b][n] - p.dc[n])});
            rep.observe(v, static_cast<long>(b), static_cast<long>(n), t);
        }
    }
}

}  // namespace

ValidationReport validate_solution(const ScenarioLattice& lattice, const Solution& solution,
                                   const Barrier& barrier, const DriverPair* pair,
                                   const ValidationOptions& options) {
    barrier.validate(lattice);
    check_shapes(lattice, solution);
    const double tol = options.tolerance;
    const int n = lattice.steps();
    const int d = lattice.w_dim();
    const int m = lattice.mark_count();
    const int bd = lattice.b_dim();
    const int kc = lattice.outcome_count();
    const NodeId nonterminal = lattice.layer_begin(n);

    auto domination = make("barrier_domination", tol);
    auto terminal = make("terminal_match", tol);
    auto monotone = make("monotone_reflection", tol);
    auto skorokhod = make("skorokhod_kc", 0.0);
    auto min_kd = make("minimality_kd", 0.0);
    auto min_c = make("minimality_c", 0.0);
    auto residual = make("one_step_residual", tol);
    auto means = make("martingale_increment_means", options.mean_tolerance);
    auto c_zero = make("c_zero_right_continuous", 0.0);

    for (std::size_t b = 0; b < solution.paths.size(); ++b) {
        const auto& p = solution.paths[b];
        const auto bl = static_cast<long>(b);
        for (NodeId node = 0; node < lattice.node_count(); ++node) {
            const int i = lattice.time_index(node);
            const auto nl = static_cast<long>(node);
            domination.observe(std::max(barrier.value(node) - p.y[node],
                                        barrier.right_limit(node) - p.y_plus[node]),
                               bl, nl, i);
            if (lattice.is_terminal(node)) {
                terminal.observe(std::abs(p.y[node] - barrier.value(node)), bl, nl, i);
            }
            monotone.observe(std::max({-p.dk_c[node], -p.dk_d[node], -p.dc[node],
                                       std::abs(p.dc[node] - (p.y[node] - p.y_plus[node]))}),
                             bl, nl, i);
            // Strict contact tests: a push is allowed only where the
            // reflected value sits exactly on the barrier.
            if (p.y_plus[node] > barrier.right_limit(node)) skorokhod.observe(p.dk_c[node], bl, nl, i);
            const bool flagged = i < n && barrier.predictable_at(i + 1);
            min_kd.observe(std::abs((p.y_plus[node] - barrier.right_limit(node)) * p.dk_d[node]), bl, nl, i);
            if (!flagged) min_kd.observe(std::abs(p.dk_d[node]), bl, nl, i);
            min_c.observe(std::abs((p.y[node] - barrier.value(node)) * p.dc[node]), bl, nl, i);
            if (!barrier.right_jump_at(i)) min_c.observe(std::abs(p.dc[node]), bl, nl, i);
            if (barrier.right_continuous()) c_zero.observe(std::abs(p.dc[node]), bl, nl, i);
        }
        for (NodeId node = 0; node < nonterminal; ++node) {
            const int i = lattice.time_index(node);
            const auto nl = static_cast<long>(node);
            const double dt = lattice.grid().dt(i);
            const auto kids = lattice.children(node);
            double drift = p.f_used[node] * dt;
            for (int c = 0; c < bd; ++c) drift += p.g_used[node * bd + c] * lattice.b_increment(b, i, c);
            const double push = p.dk_c[node] + p.dk_d[node] + p.dc[node];
            const double mean_next = conditional_expectation(lattice, p.y, node);
            double ezw = 0.0, euj = 0.0, eorth = 0.0, edn = 0.0;
            for (int k = 0; k < kc; ++k) {
                const Outcome& o = lattice.outcome(i, k);
                double zw = 0.0, uj = 0.0;
                for (int c = 0; c < d; ++c) zw += p.z[node * d + c] * o.dw[c];
                for (int e = 0; e < m; ++e) uj += p.u[node * m + e] * lattice.compensated_jump(i, k, e);
                const double orth = p.orth[node * kc + k];
                const double yc = p.y[kids[k]];
                const double rhs = yc + drift - zw - uj - orth + push;
                residual.observe(std::abs(p.y[node] - rhs), bl, nl, i);
                ezw += o.probability * zw;
                euj += o.probability * uj;
                eorth += o.probability * orth;
                edn += o.probability * (yc - mean_next);
            }
            means.observe(std::max({std::abs(ezw), std::abs(euj), std::abs(eorth), std::abs(edn)}), bl, nl, i);
        }
    }
    if (!barrier.right_continuous()) c_zero.detail = "not applicable: barrier has right jumps";

    ValidationReport rep;
    rep.checks = {domination, terminal, monotone, skorokhod, min_kd, min_c, residual, means, c_zero};

    if (!lattice.recombining()) {
        auto mert = make("mertens_consistency", 1e3 * tol);
        mertens_check(lattice, solution, barrier, tol, mert);
        rep.checks.push_back(mert);
    }

    if (pair != nullptr) {
        auto drv = make("driver_consistency", options.driver_tolerance);
        const auto du = static_cast<std::size_t>(d);
        const auto mu = static_cast<std::size_t>(m);
        for (std::size_t b = 0; b < solution.paths.size(); ++b) {
            const auto& p = solution.paths[b];
            for (NodeId node = 0; node < nonterminal; ++node) {
                DriverArgs a;
                a.step = lattice.time_index(node);
                a.t = lattice.grid().time(a.step);
                a.node = node;
                a.b_path = b;
                a.y = p.y[node];
                a.z = std::span<const double>(p.z).subspan(node * du, du);
                a.u = std::span<const double>(p.u).subspan(node * mu, mu);
                const DriverValues v = eval_drivers(*pair, lattice, a);
                double worst = std::abs(v.f - p.f_used[node]);
                for (int c = 0; c < bd; ++c) worst = std::max(worst, std::abs(v.g[c] - p.g_used[node * bd + c]));
                drv.observe(worst, static_cast<long>(b), static_cast<long>(node), a.step);
            }
        }
        rep.checks.push_back(drv);
    }

    for (auto& c : rep.checks) {
        c.finish();
        rep.pass = rep.pass && c.pass;
    }
    return rep;
}

}  // namespace rbdsde
