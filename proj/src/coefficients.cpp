#include "coefficients.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace rbdsde {

CoefficientProcess CoefficientProcess::constant(int steps, double value) {
    return per_step(std::vector<double>(static_cast<std::size_t>(steps), value));
}

CoefficientProcess CoefficientProcess::per_step(std::vector<double> values) {
    CoefficientProcess p;
    p.values_ = std::move(values);
    return p;
}

CoefficientProcess CoefficientProcess::per_node(std::vector<double> values) {
    CoefficientProcess p;
    p.values_ = std::move(values);
    p.node_indexed_ = true;
    return p;
}

StochasticLipschitzData StochasticLipschitzData::constant(int steps, double gamma, double kappa,
                                                          double sigma, double rho, double alpha,
                                                          double zeta) {
    StochasticLipschitzData d;
    d.gamma = CoefficientProcess::constant(steps, gamma);
    d.kappa = CoefficientProcess::constant(steps, kappa);
    d.sigma = CoefficientProcess::constant(steps, sigma);
    d.rho = CoefficientProcess::constant(steps, rho);
    d.zeta = CoefficientProcess::constant(steps, zeta);
    d.alpha = alpha;
    return d;
}

double StochasticLipschitzData::a2(int step, NodeId node) const {
    const double k = kappa.at(step, node);
    const double s = sigma.at(step, node);
    return gamma.at(step, node) + k * k + s * s + rho.at(step, node);
}

void StochasticLipschitzData::validate(const ScenarioLattice& lattice, bool growth_regime) const {
    const auto n = static_cast<std::size_t>(lattice.steps());
    auto check = [&](const CoefficientProcess& p, const char* name) {
        const std::size_t expected = p.node_indexed() ? lattice.node_count() : n;
        if (p.size() != expected) {
            throw PreconditionError(std::string("lipschitz data: '") + name + "' has length " +
                                    std::to_string(p.size()) + ", expected " +
                                    std::to_string(expected));
        }
        for (double v : p.values()) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw PreconditionError(std::string("lipschitz data: '") + name +
                                        "' must be finite and nonnegative");
            }
        }
    };
    check(gamma, "gamma");
    check(kappa, "kappa");
    check(sigma, "sigma");
    check(rho, "rho");
    check(zeta, "zeta");
    const double upper = growth_regime ? 0.5 : 1.0;
    if (!(alpha > 0.0 && alpha < upper)) {
        throw PreconditionError("lipschitz data: alpha must lie in (0," +
                                std::string(growth_regime ? "1/2" : "1") + ")");
    }
    for (NodeId node = 0; node < lattice.node_count(); ++node) {
        if (lattice.is_terminal(node)) continue;
        if (!(a2(lattice.time_index(node), node) > 0.0)) {
            throw PreconditionError("lipschitz data: a^2 = gamma + kappa^2 + sigma^2 + rho "
                                    "vanishes at step " +
                                    std::to_string(lattice.time_index(node)));
        }
    }
}

StepWeights a_process(const StochasticLipschitzData& data, const TimeGrid& grid) {
    const int n = grid.steps();
    for (const auto* p : {&data.gamma, &data.kappa, &data.sigma, &data.rho}) {
        if (p->node_indexed()) {
            throw PreconditionError("a_process: node-indexed data; use node_weights");
        }
        if (p->size() != static_cast<std::size_t>(n)) {
            throw PreconditionError("a_process: parameter sequences must have length N");
        }
        for (double v : p->values()) {
            if (!(v >= 0.0)) throw PreconditionError("a_process: parameters must be nonnegative");
        }
    }
    StepWeights w;
    w.A.push_back(0.0);
    for (int i = 0; i < n; ++i) {
        const double a2 = data.a2(i, 0);
        if (!(a2 > 0.0)) {
            throw PreconditionError("a_process: a^2 = 0 at step " + std::to_string(i));
        }
        w.a2.push_back(a2);
        w.A.push_back(w.A.back() + a2 * grid.dt(i));
    }
    return w;
}

WeightProcess node_weights(const StochasticLipschitzData& data, const ScenarioLattice& lattice) {
    WeightProcess w;
    w.a2.assign(lattice.node_count(), 0.0);
    w.A.assign(lattice.node_count(), 0.0);
    for (NodeId node = 0; node < lattice.node_count(); ++node) {
        const int i = lattice.time_index(node);
        if (i > 0) {
            const NodeId p = lattice.parent(node);
            w.A[node] = w.A[p] + w.a2[p] * lattice.grid().dt(i - 1);
        }
        if (!lattice.is_terminal(node)) {
            w.a2[node] = data.a2(i, node);
        } else {
            // Terminal a^2 never enters a left-endpoint sum; keep the last step's value.
            w.a2[node] = i > 0 ? w.a2[lattice.parent(node)] : 0.0;
        }
    }
    return w;
}

double lambda_norm(std::span<const double> u, std::span<const JumpMark> marks) {
    double s = 0.0;
    for (std::size_t e = 0; e < u.size() && e < marks.size(); ++e) {
        s += u[e] * u[e] * marks[e].intensity;
    }
    return std::sqrt(s);
}

DriverValues eval_drivers(const DriverPair& pair, const ScenarioLattice& lattice,
                          const DriverArgs& args) {
    if (args.u.size() != static_cast<std::size_t>(lattice.mark_count())) {
        throw PreconditionError("eval_drivers: u must be given on the full mark set");
    }
    DriverValues out;
    out.f = pair.f ? pair.f(args) : 0.0;
    out.g.assign(static_cast<std::size_t>(lattice.b_dim()), 0.0);
    if (pair.g) pair.g(args, out.g);
    auto where = [&] {
        std::ostringstream os;
        os << " at node " << args.node << " (step " << args.step << ", b_path " << args.b_path
           << ", y=" << args.y << ")";
        return os.str();
    };
    if (!std::isfinite(out.f)) throw NumericError("driver f is not finite" + where());
    for (double v : out.g) {
        if (!std::isfinite(v)) throw NumericError("driver g is not finite" + where());
    }
    return out;
}

namespace {

double dot_or_broadcast(const std::vector<double>& c, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double ck = c.empty() ? 0.0 : (c.size() == 1 ? c[0] : c.at(k));
        s += ck * x[k];
    }
    return s;
}

NoiseFn zero_noise() {
    return [](const DriverArgs&, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
}

}  // namespace

DriverPair zero_driver() {
    return DriverPair{[](const DriverArgs&) { return 0.0; }, zero_noise(), Regime::lipschitz,
                      "zero"};
}

DriverPair linear_pricing_driver(double r, std::vector<double> theta) {
    return DriverPair{[r, theta = std::move(theta)](const DriverArgs& a) {
                          return r * a.y + dot_or_broadcast(theta, a.z);
                      },
                      zero_noise(), Regime::lipschitz, "linear_pricing"};
}

DriverPair linear_driver(LinearDriverCoefficients c) {
    DriverPair p;
    p.f = [c](const DriverArgs& a) {
        return c.c0 + c.cy * a.y + dot_or_broadcast(c.cz, a.z) + dot_or_broadcast(c.cu, a.u);
    };
    p.g = [c](const DriverArgs& a, std::span<double> out) {
        const double v = c.g0 + c.gy * a.y + dot_or_broadcast(c.gz, a.z) + dot_or_broadcast(c.gu, a.u);
        std::fill(out.begin(), out.end(), v);
    };
    p.name = "linear";
    return p;
}

DriverPair quadratic_y_driver(double cap) {
    return DriverPair{[cap](const DriverArgs& a) { return std::min(a.y * a.y, cap); }, zero_noise(),
                      Regime::growth, "quadratic_y"};
}

DriverPair abs_y_driver(double c) {
    return DriverPair{[c](const DriverArgs& a) { return c * std::abs(a.y); }, zero_noise(),
                      Regime::lipschitz, "abs_y"};
}

DriverPair sine_y_driver(double amplitude, double frequency) {
    return DriverPair{[amplitude, frequency](const DriverArgs& a) {
                          return amplitude * std::sin(frequency * a.y);
                      },
                      zero_noise(), Regime::growth, "sine_y"};
}

DriverPair polynomial_driver(std::vector<double> coeffs) {
    return DriverPair{[coeffs = std::move(coeffs)](const DriverArgs& a) {
                          double acc = 0.0;
                          for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
                              acc = acc * a.y + *it;
                          }
                          return acc;
                      },
                      zero_noise(), Regime::growth, "custom_polynomial"};
}

namespace {

std::vector<double> axis_values(double center, double radius, int points) {
    std::vector<double> v;
    if (points == 1) {
        v.push_back(center);
    } else {
        for (int j = 0; j < points; ++j) {
            v.push_back(center + radius * (2.0 * j / (points - 1) - 1.0));
        }
    }
    return v;
}

double spacing(double radius, int points) {
    return points >= 2 ? 2.0 * radius / (points - 1) : 0.0;
}

struct Penalty {
    double gamma, kappa, sigma;
    std::span<const JumpMark> marks;

    double operator()(double dy, std::span<const double> dz, std::span<const double> du) const {
        double z2 = 0.0;
        for (double x : dz) z2 += x * x;
        return gamma * std::abs(dy) + kappa * std::sqrt(z2) + sigma * lambda_norm(du, marks);
    }
};

InfConvolution inf_conv_impl(const DriverFn& f, const StochasticLipschitzData& data,
                             std::span<const JumpMark> marks, int n, const DriverArgs& args,
                             const SearchDomain& dom) {
    if (n < 1) throw PreconditionError("inf_convolution: n must be >= 1");
    if ((dom.points_y <= 0 && dom.points_z <= 0 && dom.points_u <= 0) || dom.radius_y < 0.0 ||
        dom.radius_z < 0.0 || dom.radius_u < 0.0) {
        throw PreconditionError("inf_convolution: empty search domain");
    }
    const std::size_t d = args.z.size();
    const std::size_t m = args.u.size();

    // Axis 0 is y, then d z-coordinates, then m u-coordinates.
    std::vector<std::vector<double>> axes;
    axes.push_back(dom.points_y > 0 ? axis_values(dom.center_y, dom.radius_y, dom.points_y)
                                    : std::vector<double>{args.y});
    for (std::size_t k = 0; k < d; ++k) {
        axes.push_back(dom.points_z > 0 ? axis_values(dom.center_z, dom.radius_z, dom.points_z)
                                        : std::vector<double>{args.z[k]});
    }
    for (std::size_t e = 0; e < m; ++e) {
        axes.push_back(dom.points_u > 0 ? axis_values(dom.center_u, dom.radius_u, dom.points_u)
                                        : std::vector<double>{args.u[e]});
    }
    std::size_t total = 1;
    for (const auto& ax : axes) {
        total *= ax.size();
        if (total > dom.max_candidates) {
            throw PreconditionError("inf_convolution: search grid exceeds max_candidates");
        }
    }

    const double nn = static_cast<double>(n);
    const Penalty pen{nn * data.gamma.at(args.step, args.node),
                      nn * data.kappa.at(args.step, args.node),
                      nn * data.sigma.at(args.step, args.node), marks};

    std::vector<double> zq(d), uq(m), dz(d), du(m);
    DriverArgs q = args;
    auto objective = [&](double yq) {
        q.y = yq;
        q.z = zq;
        q.u = uq;
        for (std::size_t k = 0; k < d; ++k) dz[k] = args.z[k] - zq[k];
        for (std::size_t e = 0; e < m; ++e) du[e] = args.u[e] - uq[e];
        return f(q) + pen(args.y - yq, dz, du);
    };

    // The query point is always a candidate: f_n <= f there.
    std::copy(args.z.begin(), args.z.end(), zq.begin());
    std::copy(args.u.begin(), args.u.end(), uq.begin());
    InfConvolution best{objective(args.y), 0.0, args.y};
    std::vector<double> best_z(zq), best_u(uq);

    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t c = 0; c < total; ++c) {
        for (std::size_t k = 0; k < d; ++k) zq[k] = axes[1 + k][idx[1 + k]];
        for (std::size_t e = 0; e < m; ++e) uq[e] = axes[1 + d + e][idx[1 + d + e]];
        const double yq = axes[0][idx[0]];
        const double v = objective(yq);
        if (v < best.value) {
            best.value = v;
            best.argmin_y = yq;
            best_z = zq;
            best_u = uq;
        }
        for (std::size_t a = 0; a < idx.size(); ++a) {
            if (++idx[a] < axes[a].size()) break;
            idx[a] = 0;
        }
    }

    // Half a cell in every searched axis: penalty slack plus the local
    // variation of f measured one cell away from the minimiser.
    const double hy = dom.points_y > 0 ? spacing(dom.radius_y, dom.points_y) : 0.0;
    const double hz = dom.points_z > 0 ? spacing(dom.radius_z, dom.points_z) : 0.0;
    const double hu = dom.points_u > 0 ? spacing(dom.radius_u, dom.points_u) : 0.0;
    double lam_total = 0.0;
    for (const auto& mk : marks) lam_total += mk.intensity;
    double bound = 0.5 * (pen.gamma * hy + pen.kappa * std::sqrt(static_cast<double>(d)) * hz +
                          pen.sigma * std::sqrt(lam_total) * hu);
    q.z = best_z;
    q.u = best_u;
    q.y = best.argmin_y;
    const double f0 = f(q);
    double variation = 0.0;
    if (hy > 0.0) {
        for (double s : {-hy, hy}) {
            q.y = best.argmin_y + s;
            variation = std::max(variation, std::abs(f(q) - f0));
        }
        q.y = best.argmin_y;
    }
    auto probe_axis = [&](std::vector<double>& coords, double h, std::span<const double>& slot) {
        for (std::size_t k = 0; k < coords.size(); ++k) {
            const double keep = coords[k];
            for (double s : {-h, h}) {
                coords[k] = keep + s;
                slot = coords;
                variation = std::max(variation, std::abs(f(q) - f0));
            }
            coords[k] = keep;
        }
        slot = coords;
    };
    if (hz > 0.0) probe_axis(best_z, hz, q.z);
    if (hu > 0.0) probe_axis(best_u, hu, q.u);
    best.resolution_bound = bound + variation;
    return best;
}

}  // namespace

InfConvolution inf_convolution(const DriverPair& pair, const StochasticLipschitzData& data,
                               const ScenarioLattice& lattice, int n, const DriverArgs& args,
                               const SearchDomain& domain) {
    if (pair.regime != Regime::growth) {
        throw PreconditionError("inf_convolution: driver must be declared in the growth regime");
    }
    return inf_conv_impl(pair.f, data, lattice.marks(), n, args, domain);
}

DriverPair regularized_driver(const DriverPair& pair, const StochasticLipschitzData& data,
                              const ScenarioLattice& lattice, int n, const SearchDomain& domain) {
    if (pair.regime != Regime::growth) {
        throw PreconditionError("regularized_driver: driver must be declared in the growth regime");
    }
    std::vector<JumpMark> marks(lattice.marks().begin(), lattice.marks().end());
    DriverPair out;
    out.f = [f = pair.f, data, marks = std::move(marks), n, domain](const DriverArgs& a) {
        return inf_conv_impl(f, data, marks, n, a, domain).value;
    };
    out.g = pair.g;
    out.regime = Regime::lipschitz;
    out.name = pair.name + "_n" + std::to_string(n);
    return out;
}

DriverPair growth_envelope(const DriverPair& pair, const StochasticLipschitzData& data,
                           const ScenarioLattice& lattice) {
    std::vector<JumpMark> marks(lattice.marks().begin(), lattice.marks().end());
    DriverPair out;
    out.f = [data, marks = std::move(marks)](const DriverArgs& a) {
        double z2 = 0.0;
        for (double x : a.z) z2 += x * x;
        return data.zeta.at(a.step, a.node) + data.gamma.at(a.step, a.node) * std::abs(a.y) +
               data.kappa.at(a.step, a.node) * std::sqrt(z2) +
               data.sigma.at(a.step, a.node) * lambda_norm(a.u, marks);
    };
    out.g = pair.g;
    out.regime = Regime::lipschitz;
    out.name = pair.name + "_envelope";
    return out;
}

BetaFloor beta_floor(double epsilon, double alpha) {
    if (!(epsilon > 0.0)) throw PreconditionError("beta_floor: epsilon must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("beta_floor: alpha must lie in (0,1)");
    if (!(epsilon + alpha < 1.0)) {
        throw PreconditionError("beta_floor: epsilon + alpha must be < 1 for a contraction");
    }
    BetaFloor b;
    b.c_bar = 2.0 / (epsilon + alpha);
    b.beta0 = 1.0 + b.c_bar + 1.0 / epsilon;
    return b;
}

namespace {

struct ProbePoint {
    double y;
    std::vector<double> z, u;
};

ProbePoint random_point(std::mt19937_64& rng, std::size_t d, std::size_t m, double radius) {
    std::uniform_real_distribution<double> dist(-radius, radius);
    ProbePoint p{dist(rng), std::vector<double>(d), std::vector<double>(m)};
    for (auto& x : p.z) x = dist(rng);
    for (auto& x : p.u) x = dist(rng);
    return p;
}

DriverArgs args_at(const ScenarioLattice& lattice, NodeId node, std::size_t b, const ProbePoint& p) {
    DriverArgs a;
    a.node = node;
    a.step = lattice.time_index(node);
    a.t = lattice.grid().time(a.step);
    a.b_path = b;
    a.y = p.y;
    a.z = p.z;
    a.u = p.u;
    return a;
}

NodeId random_nonterminal(const ScenarioLattice& lattice, std::mt19937_64& rng) {
    const NodeId last = lattice.layer_begin(lattice.steps());
    return std::uniform_int_distribution<NodeId>(0, last - 1)(rng);
}

}  // namespace

ProbeReport probe_lipschitz(const DriverPair& pair, const StochasticLipschitzData& data,
                            const ScenarioLattice& lattice, std::size_t pairs, std::uint64_t seed,
                            double radius) {
    std::mt19937_64 rng(seed);
    const auto d = static_cast<std::size_t>(lattice.w_dim());
    const auto m = static_cast<std::size_t>(lattice.mark_count());
    ProbeReport rep;
    for (std::size_t k = 0; k < pairs; ++k) {
        const NodeId node = random_nonterminal(lattice, rng);
        const std::size_t b =
            std::uniform_int_distribution<std::size_t>(0, lattice.b_path_count() - 1)(rng);
        const auto p = random_point(rng, d, m, radius);
        const auto q = random_point(rng, d, m, radius);
        const auto vp = eval_drivers(pair, lattice, args_at(lattice, node, b, p));
        const auto vq = eval_drivers(pair, lattice, args_at(lattice, node, b, q));
        const int i = lattice.time_index(node);
        double dz2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) dz2 += (p.z[c] - q.z[c]) * (p.z[c] - q.z[c]);
        std::vector<double> du(m);
        for (std::size_t e = 0; e < m; ++e) du[e] = p.u[e] - q.u[e];
        const double dun = lambda_norm(du, lattice.marks());
        const double dy = std::abs(p.y - q.y);
        const double bound_f = data.gamma.at(i, node) * dy + data.kappa.at(i, node) * std::sqrt(dz2) +
                               data.sigma.at(i, node) * dun;
        const double slack = 1e-12 * (1.0 + std::abs(vp.f) + std::abs(vq.f));
        const double vf = std::abs(vp.f - vq.f) - bound_f - slack;
        double dg2 = 0.0;
        for (std::size_t c = 0; c < vp.g.size(); ++c) dg2 += (vp.g[c] - vq.g[c]) * (vp.g[c] - vq.g[c]);
        const double bound_g = data.rho.at(i, node) * dy * dy + data.alpha * (dz2 + dun * dun);
        const double vg = dg2 - bound_g - 1e-12 * (1.0 + dg2);
        const double v = std::max(vf, vg);
        ++rep.probes;
        if (v > rep.max_violation) {
            rep.max_violation = v;
            rep.pass = false;
            std::ostringstream os;
            os << (vf >= vg ? "f" : "g") << " Lipschitz bound violated at node " << node
               << " (y=" << p.y << " vs " << q.y << ")";
            rep.worst = os.str();
        }
    }
    return rep;
}

ProbeReport probe_growth(const DriverPair& pair, const StochasticLipschitzData& data,
                         const ScenarioLattice& lattice, std::size_t probes, std::uint64_t seed,
                         double radius) {
    std::mt19937_64 rng(seed);
    const auto d = static_cast<std::size_t>(lattice.w_dim());
    const auto m = static_cast<std::size_t>(lattice.mark_count());
    const auto envelope = growth_envelope(pair, data, lattice);
    ProbeReport rep;
    for (std::size_t k = 0; k < probes; ++k) {
        const NodeId node = random_nonterminal(lattice, rng);
        const auto p = random_point(rng, d, m, radius);
        const auto a = args_at(lattice, node, 0, p);
        const double fv = eval_drivers(pair, lattice, a).f;
        const double bound = envelope.f(a);
        const double v = std::abs(fv) - bound - 1e-12 * (1.0 + bound);
        ++rep.probes;
        if (v > rep.max_violation) {
            rep.max_violation = v;
            rep.pass = false;
            std::ostringstream os;
            os << "growth bound violated at node " << node << " (y=" << p.y << ")";
            rep.worst = os.str();
        }
    }
    return rep;
}

}  // namespace rbdsde
