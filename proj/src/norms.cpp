#include "norms.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace rbdsde {

namespace {

void check_fields(const ScenarioLattice& lattice, const PathFields& f, std::size_t stride,
                  const char* what) {
    if (f.size() != lattice.b_path_count()) {
        throw PreconditionError(std::string("norms: ") + what + " needs one field per b-path");
    }
    for (const auto& v : f) {
        if (v.size() != lattice.node_count() * stride) {
            throw PreconditionError(std::string("norms: ") + what + " length mismatch");
        }
    }
}

double running_max_tree(const ScenarioLattice& lattice, const std::vector<double>& x) {
    std::vector<double> run(lattice.node_count());
    run[0] = x[0];
    for (NodeId k = 1; k < lattice.node_count(); ++k) run[k] = std::max(run[lattice.parent(k)], x[k]);
    const int n = lattice.steps();
    double e = 0.0;
    for (NodeId k = lattice.layer_begin(n); k < lattice.layer_end(n); ++k) {
        e += lattice.node_probability(k) * run[k];
    }
    return e;
}

// E[M] = sum_k (v_k - v_{k+1}) P(M >= v_k) over the distinct values in
// decreasing order; P(M < v) is the mass of paths avoiding {x >= v}.
double running_max_dag(const ScenarioLattice& lattice, const std::vector<double>& x) {
    std::vector<double> levels(x.begin(), x.end());
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const int n = lattice.steps();
    const NodeId nonterminal = lattice.layer_begin(n);
    std::vector<double> q(lattice.node_count());
    double e = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double v = levels[k];
        if (v <= 0.0) break;
        const double next = k + 1 < levels.size() ? std::max(levels[k + 1], 0.0) : 0.0;
        std::fill(q.begin(), q.end(), 0.0);
        q[0] = x[0] < v ? 1.0 : 0.0;
        for (NodeId node = 0; node < nonterminal; ++node) {
            if (q[node] == 0.0) continue;
            const int step = lattice.time_index(node);
            const auto kids = lattice.children(node);
            for (std::size_t c = 0; c < kids.size(); ++c) {
                if (x[kids[c]] < v) {
                    q[kids[c]] += q[node] * lattice.outcome(step, static_cast<int>(c)).probability;
                }
            }
        }
        double avoid = 0.0;
        for (NodeId node = nonterminal; node < lattice.node_count(); ++node) avoid += q[node];
        e += (v - next) * (1.0 - avoid);
    }
    return e;
}

}  // namespace

PathFields squared_magnitude(const PathFields& field, std::size_t stride) {
    PathFields out;
    out.reserve(field.size());
    for (const auto& v : field) {
        std::vector<double> sq(stride == 0 ? 0 : v.size() / stride, 0.0);
        for (std::size_t k = 0; k < sq.size(); ++k) {
            double s = 0.0;
            for (std::size_t c = 0; c < stride; ++c) s += v[k * stride + c] * v[k * stride + c];
            sq[k] = s;
        }
        out.push_back(std::move(sq));
    }
    return out;
}

double expected_running_max(const ScenarioLattice& lattice, const PathFields& values) {
    check_fields(lattice, values, 1, "running max field");
    double e = 0.0;
    for (std::size_t b = 0; b < values.size(); ++b) {
        const double eb = lattice.recombining() ? running_max_dag(lattice, values[b])
                                                : running_max_tree(lattice, values[b]);
        e += lattice.b_paths()[b].probability * eb;
    }
    return e;
}

double expected_left_sum(const ScenarioLattice& lattice, const PathFields& integrand) {
    check_fields(lattice, integrand, 1, "integrand");
    const NodeId nonterminal = lattice.layer_begin(lattice.steps());
    double e = 0.0;
    for (std::size_t b = 0; b < integrand.size(); ++b) {
        double eb = 0.0;
        for (NodeId k = 0; k < nonterminal; ++k) {
            eb += lattice.node_probability(k) * integrand[b][k] *
                  lattice.grid().dt(lattice.time_index(k));
        }
        e += lattice.b_paths()[b].probability * eb;
    }
    return e;
}

double s2_norm(const ScenarioLattice& lattice, const WeightProcess& w, const PathFields& sq,
               double beta) {
    PathFields weighted = sq;
    for (auto& v : weighted) {
        for (NodeId k = 0; k < v.size(); ++k) v[k] *= std::exp(beta * w.A[k]);
    }
    return expected_running_max(lattice, weighted);
}

double m2_norm(const ScenarioLattice& lattice, const WeightProcess& w, const PathFields& sq,
               double beta, bool a_weighted) {
    PathFields weighted = sq;
    for (auto& v : weighted) {
        for (NodeId k = 0; k < v.size(); ++k) {
            v[k] *= std::exp(beta * w.A[k]) * (a_weighted ? w.a2[k] : 1.0);
        }
    }
    return expected_left_sum(lattice, weighted);
}

NormReport weighted_norms(const ScenarioLattice& lattice, const WeightProcess& w,
                          const PathFields& y, const PathFields& z, const PathFields& u,
                          double beta) {
    if (!(beta > 0.0)) throw PreconditionError("weighted_norms: beta must be > 0");
    if (w.A.size() != lattice.node_count() || w.a2.size() != lattice.node_count()) {
        throw PreconditionError("weighted_norms: weight process length mismatch");
    }
    const auto d = static_cast<std::size_t>(lattice.w_dim());
    const auto m = static_cast<std::size_t>(lattice.mark_count());
    check_fields(lattice, y, 1, "Y");
    check_fields(lattice, z, d, "Z");
    check_fields(lattice, u, m, "U");

    NormReport r;
    r.beta = beta;
    const auto y2 = squared_magnitude(y, 1);
    r.s2beta = s2_norm(lattice, w, y2, beta);
    r.m2a_beta = m2_norm(lattice, w, y2, beta, true);
    r.m2beta_z = m2_norm(lattice, w, squared_magnitude(z, d), beta, false);

    // ||U||_lambda^2 = sum_e |U(e)|^2 lambda(e)
    PathFields u2;
    for (const auto& v : u) {
        std::vector<double> s(lattice.node_count(), 0.0);
        for (NodeId k = 0; k < s.size(); ++k) {
            for (std::size_t e = 0; e < m; ++e) {
                s[k] += v[k * m + e] * v[k * m + e] * lattice.marks()[e].intensity;
            }
        }
        u2.push_back(std::move(s));
    }
    r.l2beta_u = m2_norm(lattice, w, u2, beta, false);
    r.bundle = r.s2beta + r.m2a_beta + r.m2beta_z + r.l2beta_u;
    return r;
}

void attach_barrier_norm(NormReport& report, const ScenarioLattice& lattice, const WeightProcess& w,
                         std::span<const double> barrier_main) {
    PathFields sq(lattice.b_path_count(), std::vector<double>(barrier_main.size()));
    for (auto& v : sq) {
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = barrier_main[k] * barrier_main[k];
    }
    report.barrier_s2_2beta = s2_norm(lattice, w, sq, 2.0 * report.beta);
}

}  // namespace rbdsde
