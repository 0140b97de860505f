#include "experiment.hpp"

#include "errors.hpp"
#include "norms.hpp"
#include "suite.hpp"
#include "verify.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace rbdsde {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class Writer {
public:
    Writer(const std::string& dir, ExperimentResult& res) : dir_(dir), res_(res) {
        fs::create_directories(dir_);
    }

    void text(const std::string& name, const std::string& body) {
        std::ofstream out(fs::path(dir_) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (fs::path(dir_) / name).string());
        out << body;
        res_.files.push_back(name);
    }
    void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

private:
    std::string dir_;
    ExperimentResult& res_;
};

json number_json(double x) {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

json report_json(const std::vector<CheckReport>& checks) {
    json arr = json::array();
    for (const auto& c : checks) {
        json params = json::object();
        for (const auto& [k, v] : c.params) params[k] = number_json(v);
        arr.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"max_violation", number_json(c.max_violation)},
                       {"tolerance", c.tolerance},
                       {"b_path", c.b_path},
                       {"node", c.node},
                       {"time_index", c.time_index},
                       {"params", params},
                       {"detail", c.detail}});
    }
    return arr;
}

std::string solution_csv(const ScenarioLattice& lat, const Solution& sol, const Barrier& bar) {
    const int d = lat.w_dim();
    const int m = lat.mark_count();
    std::string s = "b_path,time_index,node_id,Y,Y_plus";
    for (int c = 0; c < d; ++c) s += ",Z" + std::to_string(c);
    for (int e = 0; e < m; ++e) s += ",U" + std::to_string(e);
    s += ",K,K_d,C,xi,xi_plus\n";
    for (std::size_t b = 0; b < sol.paths.size(); ++b) {
        const auto& p = sol.paths[b];
        std::vector<double> k, kd, c;
        if (lat.recombining()) {
            // Cumulative reflection is path-dependent here: emit per-node increments.
            k.resize(lat.node_count());
            for (NodeId n = 0; n < k.size(); ++n) k[n] = p.dk_c[n] + p.dk_d[n];
            kd = p.dk_d;
            c = p.dc;
        } else {
            auto cum = cumulative_reflection(lat, p);
            k = std::move(cum.k);
            kd = std::move(cum.k_d);
            c = std::move(cum.c);
        }
        for (NodeId n = 0; n < lat.node_count(); ++n) {
            s += std::to_string(b) + "," + std::to_string(lat.time_index(n)) + "," + std::to_string(n);
            s += "," + g17(p.y[n]) + "," + g17(p.y_plus[n]);
            for (int j = 0; j < d; ++j) s += "," + g17(p.z[n * d + j]);
            for (int e = 0; e < m; ++e) s += "," + g17(p.u[n * m + e]);
            s += "," + g17(k[n]) + "," + g17(kd[n]) + "," + g17(c[n]) + "," + g17(bar.value(n)) + "," +
                 g17(bar.right_limit(n)) + "\n";
        }
    }
    return s;
}

std::string trace_csv(const PicardTrace& t) {
    std::string s = "iter,bundle_diff,ratio\n";
    for (std::size_t k = 0; k < t.diffs.size(); ++k) {
        s += std::to_string(k + 1) + "," + g17(t.diffs[k]) + "," + (k == 0 ? "" : g17(t.ratios[k])) + "\n";
    }
    return s;
}

json norms_json(const NormReport& r) {
    json j = {{"beta", r.beta},
              {"s2_beta_y", r.s2beta},
              {"m2a_beta_y", r.m2a_beta},
              {"m2_beta_z", r.m2beta_z},
              {"l2_beta_u", r.l2beta_u},
              {"bundle", r.bundle}};
    if (r.barrier_s2_2beta) j["barrier_s2_2beta"] = *r.barrier_s2_2beta;
    return j;
}

json trace_meta(const PicardTrace& t) {
    return {{"iterations", t.iterations()}, {"converged", t.converged}, {"beta", t.beta},
            {"beta0", t.beta0},             {"epsilon", t.epsilon},     {"alpha", t.alpha},
            {"tolerance", t.tolerance},     {"beta_below_floor", t.beta_below_floor}};
}

NormReport solution_norms(const ScenarioLattice& lat, const Solution& sol, const Barrier& bar,
                          const StochasticLipschitzData& data, double beta) {
    const WeightProcess w = node_weights(data, lat);
    NormReport r = weighted_norms(lat, w, sol.y(), sol.z(), sol.u(), beta);
    attach_barrier_norm(r, lat, w, bar.main());
    return r;
}

double default_beta(const RunConfig& c) {
    if (c.beta) return *c.beta;
    return std::max(beta_floor(c.epsilon, c.coeffs.alpha).beta0, 2.5);
}

void append_validation(std::vector<CheckReport>& out, const ValidationReport& v) {
    for (const auto& c : v.checks) {
        out.push_back(c);
        out.back().name = "validate/" + c.name;
    }
}

CheckReport failure(const std::string& name, const std::string& detail) {
    CheckReport r;
    r.name = name;
    r.pass = false;
    r.max_violation = INFINITY;
    r.detail = detail;
    return r;
}

// f and g evaluated at Theta = 0; refuses drivers that react to (y, z, u).
DecoupledDrivers decoupled_fields(const ScenarioLattice& lat, const DriverPair& pair) {
    DecoupledDrivers dr = DecoupledDrivers::zero(lat);
    const auto d = static_cast<std::size_t>(lat.w_dim());
    const auto m = static_cast<std::size_t>(lat.mark_count());
    const auto bd = static_cast<std::size_t>(lat.b_dim());
    const std::vector<double> z0(d, 0.0), u0(m, 0.0), z1(d, 0.7), u1(m, -0.4);
    for (std::size_t b = 0; b < lat.b_path_count(); ++b) {
        for (NodeId n = 0; n < lat.layer_begin(lat.steps()); ++n) {
            DriverArgs a;
            a.step = lat.time_index(n);
            a.t = lat.grid().time(a.step);
            a.node = n;
            a.b_path = b;
            a.z = z0;
            a.u = u0;
            const auto v0 = eval_drivers(pair, lat, a);
            a.y = 1.3;
            a.z = z1;
            a.u = u1;
            const auto v1 = eval_drivers(pair, lat, a);
            if (v0.f != v1.f || v0.g != v1.g) {
                throw ConfigError("driver", "decoupled mode needs 'driver' f and g independent of (y, z, u)");
            }
            dr.f[b][n] = v0.f;
            std::copy(v0.g.begin(), v0.g.end(), dr.g[b].begin() + static_cast<std::ptrdiff_t>(n * bd));
        }
    }
    return dr;
}

Barrier make_barrier(const RunConfig& c, const ScenarioLattice& lat) {
    try {
        return build_barrier(c.barrier, lat);
    } catch (const PreconditionError& e) {
        throw ConfigError("barrier", e.what());
    }
}

ScenarioLattice make_lattice(const RunConfig& c) {
    try {
        return ScenarioLattice::build(c.lattice);
    } catch (const PreconditionError& e) {
        throw ConfigError("lattice", e.what());
    }
}

void run_decoupled(const RunConfig& c, Writer& w, ExperimentResult& res) {
    const auto lat = make_lattice(c);
    const auto bar = make_barrier(c, lat);
    const auto data = lipschitz_data(c, lat.steps());
    const auto drivers = decoupled_fields(lat, c.pair);
    const Solution sol = solve_decoupled(lat, drivers, bar);
    append_validation(res.checks, validate_solution(lat, sol, bar));
    if (!lat.recombining() && lat.node_count() <= kDefaultAtomBudget) {
        for (std::size_t b = 0; b < lat.b_path_count(); ++b) {
            res.checks.push_back(snell_oracle(lat, drivers, bar, b));
        }
    }
    w.text("solution.csv", solution_csv(lat, sol, bar));
    w.json_file("norms.json", norms_json(solution_norms(lat, sol, bar, data, default_beta(c))));
}

void run_picard(const RunConfig& c, Writer& w, ExperimentResult& res) {
    const auto lat = make_lattice(c);
    const auto bar = make_barrier(c, lat);
    const auto data = lipschitz_data(c, lat.steps());
    PicardOptions o;
    o.beta = *c.beta;
    o.epsilon = c.epsilon;
    o.tolerance = c.tolerance;
    o.max_iter = c.max_iter;
    PicardResult pr;
    try {
        pr = picard_solve(lat, c.pair, bar, data, o);
    } catch (const DivergenceError& e) {
        w.text("trace.csv", trace_csv(e.trace()));
        res.checks.push_back(failure("picard_divergence", e.what()));
        return;
    }
    CheckReport conv;
    conv.name = "picard_converged";
    conv.pass = pr.trace.converged;
    conv.max_violation = pr.trace.diffs.back();
    conv.tolerance = c.tolerance;
    conv.params["iterations"] = pr.trace.iterations();
    if (pr.trace.beta_below_floor) conv.detail = "warning: beta below beta0";
    res.checks.push_back(conv);
    const bool exact = std::find(pr.trace.diffs.begin(), pr.trace.diffs.end(), 0.0) != pr.trace.diffs.end();
    if (exact || pr.trace.iterations() >= 3) {
        res.checks.push_back(check_contraction(pr.trace, c.epsilon, data.alpha));
    }
    append_validation(res.checks, validate_solution(lat, pr.solution, bar, &c.pair));
    w.text("solution.csv", solution_csv(lat, pr.solution, bar));
    w.text("trace.csv", trace_csv(pr.trace));
    json norms = norms_json(solution_norms(lat, pr.solution, bar, data, *c.beta));
    norms["picard"] = trace_meta(pr.trace);
    w.json_file("norms.json", norms);
}

void run_minimal(const RunConfig& c, Writer& w, ExperimentResult& res) {
    const auto lat = make_lattice(c);
    const auto bar = make_barrier(c, lat);
    const auto data = lipschitz_data(c, lat.steps());
    MinimalOptions o;
    o.picard.beta = default_beta(c);
    o.picard.epsilon = c.epsilon;
    o.picard.tolerance = c.tolerance;
    o.picard.max_iter = c.max_iter;
    o.n_max = c.n_max;
    o.domain = c.search;
    MinimalResult mr;
    try {
        mr = minimal_solution_solve(lat, c.pair, bar, data, o);
    } catch (const NumericError& e) {
        res.checks.push_back(failure("minimal_monotonicity", e.what()));
        return;
    }
    CheckReport mono;
    mono.name = "minimal_monotonicity";
    mono.tolerance = 1e-10;
    mono.params["sup_gap"] = mr.sup_gap;
    mono.params["n_max"] = c.n_max;
    mono.finish();
    res.checks.push_back(mono);
    append_validation(res.checks, validate_solution(lat, mr.solution, bar));

    std::string snaps = "n,b_path,node_id,Y\n";
    for (std::size_t n = 0; n < mr.history.size(); ++n) {
        for (std::size_t b = 0; b < mr.history[n].size(); ++b) {
            for (NodeId k = 0; k < lat.node_count(); ++k) {
                snaps += std::to_string(n + 1) + "," + std::to_string(b) + "," + std::to_string(k) + "," +
                         g17(mr.history[n][b][k]) + "\n";
            }
        }
    }
    for (std::size_t b = 0; b < mr.envelope_y.size(); ++b) {
        for (NodeId k = 0; k < lat.node_count(); ++k) {
            snaps += "envelope," + std::to_string(b) + "," + std::to_string(k) + "," + g17(mr.envelope_y[b][k]) + "\n";
        }
    }
    w.text("solution.csv", solution_csv(lat, mr.solution, bar));
    w.text("snapshots.csv", snaps);
    json norms = norms_json(solution_norms(lat, mr.solution, bar, data, o.picard.beta));
    norms["sup_gap"] = mr.sup_gap;
    w.json_file("norms.json", norms);
}

void run_american(const RunConfig& c, Writer& w, ExperimentResult& res) {
    AmericanResult ar = [&] {
        try {
            american_rates(c.american);
        } catch (const PreconditionError& e) {
            throw ConfigError("american", e.what());
        }
        return price_american(c.american);
    }();
    const double oracle = binomial_american_reference(c.american);
    CheckReport eq;
    eq.name = "price_vs_binomial";
    eq.tolerance = 1e-12;
    eq.max_violation = std::abs(ar.price - oracle);
    eq.params["price"] = ar.price;
    eq.params["oracle"] = oracle;
    eq.finish();
    res.checks.push_back(eq);
    append_validation(res.checks, validate_solution(ar.lattice, ar.solution, ar.barrier));
    w.text("solution.csv", solution_csv(ar.lattice, ar.solution, ar.barrier));
    w.text("trace.csv", trace_csv(ar.trace));
    w.json_file("price.json", {{"price", ar.price},
                               {"binomial_oracle", oracle},
                               {"n_steps", c.american.n_steps},
                               {"up", c.american.up},
                               {"down", c.american.down},
                               {"rate", ar.rate},
                               {"theta", ar.theta},
                               {"picard", trace_meta(ar.trace)}});
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config) {
    ExperimentResult res;
    Writer w(config.out_dir, res);
    switch (config.mode) {
        case Mode::decoupled: run_decoupled(config, w, res); break;
        case Mode::picard: run_picard(config, w, res); break;
        case Mode::minimal: run_minimal(config, w, res); break;
        case Mode::price_american: run_american(config, w, res); break;
        case Mode::verify_suite: res.checks = run_verify_suite(); break;
    }
    w.json_file("report.json", report_json(res.checks));
    res.exit_code = all_pass(res.checks) ? 0 : 1;
    std::size_t failed = 0;
    for (const auto& ch : res.checks) failed += ch.pass ? 0 : 1;
    res.message = mode_name(config.mode) + ": " + std::to_string(res.checks.size() - failed) + "/" +
                  std::to_string(res.checks.size()) + " checks passed";
    return res;
}

ExperimentResult run_from_file(Mode mode, const std::string& config_path, const Overrides& overrides) {
    ExperimentResult res;
    try {
        RunConfig cfg;
        if (mode == Mode::verify_suite && config_path.empty()) {
            cfg.mode = mode;
        } else {
            cfg = load_config(config_path, mode);
        }
        apply_overrides(cfg, overrides);
        return run_experiment(cfg);
    } catch (const ConfigError& e) {
        res.exit_code = 2;
        res.message = std::string("config error [") + e.key() + "]: " + e.what();
    } catch (const PreconditionError& e) {
        res.exit_code = 2;
        res.message = std::string("invalid input: ") + e.what();
    } catch (const std::exception& e) {
        res.exit_code = 1;
        res.message = std::string("run failed: ") + e.what();
    }
    return res;
}

}  // namespace rbdsde
