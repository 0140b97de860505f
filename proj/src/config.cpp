#include "config.hpp"

#include "errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace rbdsde {

using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

const json* child(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& object(const json& j, const std::string& key, const std::string& path) {
    const json* c = child(j, key);
    if (!c) throw ConfigError(path, "missing required key '" + path + "'");
    if (!c->is_object()) throw ConfigError(path, "'" + path + "' must be an object");
    return *c;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "'" + path + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "'" + path + "' must be finite");
    return x;
}

double number_or(const json& j, const std::string& key, const std::string& prefix, double fallback) {
    const json* c = child(j, key);
    return c ? number(*c, join(prefix, key)) : fallback;
}

double required_number(const json& j, const std::string& key, const std::string& prefix) {
    const json* c = child(j, key);
    if (!c) throw ConfigError(join(prefix, key), "missing required key '" + join(prefix, key) + "'");
    return number(*c, join(prefix, key));
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "'" + path + "' must be an integer");
    return v.get<int>();
}

int integer_or(const json& j, const std::string& key, const std::string& prefix, int fallback) {
    const json* c = child(j, key);
    return c ? integer(*c, join(prefix, key)) : fallback;
}

std::string string_of(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "'" + path + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
    if (v.is_number()) return {number(v, path)};
    if (!v.is_array()) throw ConfigError(path, "'" + path + "' must be a number or an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], path + "[" + std::to_string(k) + "]"));
    return out;
}

std::vector<double> numbers_or_empty(const json& j, const std::string& key, const std::string& prefix) {
    const json* c = child(j, key);
    return c ? numbers(*c, join(prefix, key)) : std::vector<double>{};
}

LatticeConfig parse_lattice(const json& j) {
    const std::string p = "lattice";
    LatticeConfig c;
    c.n_steps = integer(*[&] {
        const json* v = child(j, "n_steps");
        if (!v) throw ConfigError("lattice.n_steps", "missing required key 'lattice.n_steps'");
        return v;
    }(), "lattice.n_steps");
    if (c.n_steps < 1) throw ConfigError("lattice.n_steps", "'lattice.n_steps' must be >= 1");
    c.horizon = number_or(j, "horizon", p, 1.0);
    if (!(c.horizon > 0.0)) throw ConfigError("lattice.horizon", "'lattice.horizon' must be > 0");
    c.knots = numbers_or_empty(j, "knots", p);
    c.w_dim = integer_or(j, "w_dim", p, 1);
    if (c.w_dim < 1) throw ConfigError("lattice.w_dim", "'lattice.w_dim' must be >= 1");
    c.w_branching = integer_or(j, "w_branching", p, 2);
    if (c.w_branching != 2 && c.w_branching != 3) {
        throw ConfigError("lattice.w_branching", "'lattice.w_branching' must be 2 or 3");
    }
    if (const json* m = child(j, "marks")) {
        if (!m->is_array()) throw ConfigError("lattice.marks", "'lattice.marks' must be an array");
        for (std::size_t k = 0; k < m->size(); ++k) {
            const std::string mp = "lattice.marks[" + std::to_string(k) + "]";
            if (!(*m)[k].is_object()) throw ConfigError(mp, "'" + mp + "' must be an object");
            JumpMark jm;
            jm.value = required_number((*m)[k], "value", mp);
            jm.intensity = required_number((*m)[k], "intensity", mp);
            if (!(jm.intensity > 0.0)) throw ConfigError(mp + ".intensity", "'" + mp + ".intensity' must be > 0");
            c.marks.push_back(jm);
        }
    }
    if (const json* b = child(j, "b_paths")) {
        if (b->is_string()) {
            c.b_path_rule = b->get<std::string>();
        } else if (b->is_array()) {
            for (std::size_t k = 0; k < b->size(); ++k) {
                const std::string bp = "lattice.b_paths[" + std::to_string(k) + "]";
                const json& e = (*b)[k];
                if (!e.is_object()) throw ConfigError(bp, "'" + bp + "' must be an object");
                BPath path;
                path.probability = required_number(e, "probability", bp);
                const json* inc = child(e, "increments");
                if (!inc || !inc->is_array()) {
                    throw ConfigError(bp + ".increments", "'" + bp + ".increments' must be an array");
                }
                for (std::size_t s = 0; s < inc->size(); ++s) {
                    path.increments.push_back(numbers((*inc)[s], bp + ".increments[" + std::to_string(s) + "]"));
                }
                c.b_paths.push_back(std::move(path));
            }
        } else {
            throw ConfigError("lattice.b_paths", "'lattice.b_paths' must be a rule string or a list of paths");
        }
    }
    if (const json* r = child(j, "recombining")) {
        if (!r->is_boolean()) throw ConfigError("lattice.recombining", "'lattice.recombining' must be a boolean");
        c.recombining = r->get<bool>();
    }
    return c;
}

std::vector<double> vector_param(const json& j, const std::string& key, const std::string& prefix) {
    return numbers_or_empty(j, key, prefix);
}

DriverPair parse_f(const json& j, Regime& regime) {
    const std::string p = "driver.f";
    const json* n = child(j, "name");
    if (!n) throw ConfigError("driver.f.name", "missing required key 'driver.f.name'");
    const std::string name = string_of(*n, "driver.f.name");
    regime = Regime::lipschitz;
    if (name == "zero") return zero_driver();
    if (name == "constant") {
        LinearDriverCoefficients c;
        c.c0 = required_number(j, "value", p);
        return linear_driver(c);
    }
    if (name == "linear") {
        LinearDriverCoefficients c;
        c.c0 = number_or(j, "c0", p, 0.0);
        c.cy = number_or(j, "cy", p, 0.0);
        c.cz = vector_param(j, "cz", p);
        c.cu = vector_param(j, "cu", p);
        return linear_driver(c);
    }
    if (name == "pricing" || name == "linear_pricing") {
        auto theta = vector_param(j, "theta", p);
        if (theta.empty()) theta = {0.0};
        return linear_pricing_driver(required_number(j, "r", p), theta);
    }
    if (name == "abs" || name == "abs_y") return abs_y_driver(required_number(j, "c", p));
    regime = Regime::growth;
    if (name == "quadratic" || name == "quadratic_y") return quadratic_y_driver(required_number(j, "cap", p));
    if (name == "sine") return sine_y_driver(required_number(j, "amplitude", p), number_or(j, "frequency", p, 1.0));
    if (name == "polynomial" || name == "custom_polynomial") {
        const json* c = child(j, "coeffs");
        if (!c) throw ConfigError("driver.f.coeffs", "missing required key 'driver.f.coeffs'");
        return polynomial_driver(numbers(*c, "driver.f.coeffs"));
    }
    throw ConfigError("driver.f.name", "unknown driver 'driver.f.name' = " + name +
                                           " (zero, constant, linear, linear_pricing, abs_y, quadratic_y, sine, custom_polynomial)");
}

NoiseFn parse_g(const json& j) {
    const std::string p = "driver.g";
    const json* n = child(j, "name");
    if (!n) throw ConfigError("driver.g.name", "missing required key 'driver.g.name'");
    const std::string name = string_of(*n, "driver.g.name");
    LinearDriverCoefficients c;
    if (name == "zero") return zero_driver().g;
    if (name == "constant") {
        c.g0 = required_number(j, "value", p);
    } else if (name == "linear") {
        c.g0 = number_or(j, "g0", p, 0.0);
        c.gy = number_or(j, "gy", p, 0.0);
        c.gz = vector_param(j, "gz", p);
        c.gu = vector_param(j, "gu", p);
    } else {
        throw ConfigError("driver.g.name", "unknown noise coefficient 'driver.g.name' = " + name +
                                               " (zero, constant, linear)");
    }
    return linear_driver(c).g;
}

DriverPair parse_driver(const json& j) {
    Regime regime = Regime::lipschitz;
    DriverPair pair = zero_driver();
    std::string name = "zero";
    if (const json* f = child(j, "f")) {
        if (!f->is_object()) throw ConfigError("driver.f", "'driver.f' must be an object");
        pair = parse_f(*f, regime);
        name = string_of(*child(*f, "name"), "driver.f.name");
    }
    if (const json* g = child(j, "g")) {
        if (!g->is_object()) throw ConfigError("driver.g", "'driver.g' must be an object");
        pair.g = parse_g(*g);
    }
    if (const json* r = child(j, "regime")) {
        const std::string rs = string_of(*r, "driver.regime");
        if (rs == "lipschitz") {
            regime = Regime::lipschitz;
        } else if (rs == "growth") {
            regime = Regime::growth;
        } else {
            throw ConfigError("driver.regime", "'driver.regime' must be 'lipschitz' or 'growth'");
        }
    }
    pair.regime = regime;
    pair.name = name;
    return pair;
}

BarrierSpec parse_barrier(const json& j) {
    const std::string p = "barrier";
    const json* s = child(j, "shape");
    if (!s) throw ConfigError("barrier.shape", "missing required key 'barrier.shape'");
    const std::string shape = string_of(*s, "barrier.shape");
    BarrierSpec b;
    if (shape == "constant") {
        b.kind = BarrierSpec::Kind::constant;
        b.c = required_number(j, "c", p);
    } else if (shape == "put_payoff") {
        b.kind = BarrierSpec::Kind::put_payoff;
        b.strike = required_number(j, "strike", p);
        b.s0 = required_number(j, "s0", p);
        b.up = required_number(j, "up", p);
        b.down = required_number(j, "down", p);
    } else if (shape == "deterministic_sequence" || shape == "table") {
        b.kind = shape == "table" ? BarrierSpec::Kind::table : BarrierSpec::Kind::deterministic_sequence;
        const json* v = child(j, "values");
        if (!v) throw ConfigError("barrier.values", "missing required key 'barrier.values'");
        b.values = numbers(*v, "barrier.values");
        b.right_values = numbers_or_empty(j, "right_values", p);
    } else {
        throw ConfigError("barrier.shape", "unknown 'barrier.shape' = " + shape +
                                               " (constant, put_payoff, deterministic_sequence, table)");
    }
    if (const json* t = child(j, "predictable_times")) {
        if (!t->is_array()) throw ConfigError("barrier.predictable_times", "'barrier.predictable_times' must be an array");
        for (std::size_t k = 0; k < t->size(); ++k) {
            b.predictable_times.push_back(integer((*t)[k], "barrier.predictable_times[" + std::to_string(k) + "]"));
        }
    }
    return b;
}

void parse_lipschitz(const json& j, RunConfig::Coeffs& c) {
    const std::string p = "lipschitz";
    auto field = [&](const char* key, std::vector<double>& out) {
        if (const json* v = child(j, key)) {
            out = numbers(*v, join(p, key));
            for (double x : out) {
                if (x < 0.0) throw ConfigError(join(p, key), "'" + join(p, key) + "' must be >= 0");
            }
        }
    };
    field("gamma", c.gamma);
    field("kappa", c.kappa);
    field("sigma", c.sigma);
    field("rho", c.rho);
    field("zeta", c.zeta);
    c.alpha = number_or(j, "alpha", p, c.alpha);
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("lipschitz.alpha", "'lipschitz.alpha' must lie in (0,1)");
}

AmericanClaimConfig parse_american(const json& j, std::optional<double>& volatility) {
    const std::string p = "american";
    AmericanClaimConfig a;
    a.s0 = required_number(j, "s0", p);
    a.strike = required_number(j, "strike", p);
    a.n_steps = integer(*[&] {
        const json* v = child(j, "n_steps");
        if (!v) throw ConfigError("american.n_steps", "missing required key 'american.n_steps'");
        return v;
    }(), "american.n_steps");
    if (a.n_steps < 1) throw ConfigError("american.n_steps", "'american.n_steps' must be >= 1");
    a.horizon = number_or(j, "horizon", p, 1.0);
    if (!(a.horizon > 0.0)) throw ConfigError("american.horizon", "'american.horizon' must be > 0");
    const json* r = child(j, "rate");
    if (!r) throw ConfigError("american.rate", "missing required key 'american.rate'");
    a.rate = numbers(*r, "american.rate");
    if (child(j, "volatility")) {
        const double vol = required_number(j, "volatility", p);
        if (!(vol > 0.0)) throw ConfigError("american.volatility", "'american.volatility' must be > 0");
        volatility = vol;
        a.up = std::exp(vol * std::sqrt(a.horizon / a.n_steps));
        a.down = 1.0 / a.up;
    } else {
        a.up = required_number(j, "up", p);
        a.down = required_number(j, "down", p);
    }
    if (!(a.down > 0.0) || !(a.up > a.down)) throw ConfigError("american.up", "'american.up' must exceed 'american.down' > 0");
    return a;
}

}  // namespace

Mode parse_mode(const std::string& name) {
    if (name == "decoupled") return Mode::decoupled;
    if (name == "picard") return Mode::picard;
    if (name == "minimal") return Mode::minimal;
    if (name == "price_american") return Mode::price_american;
    if (name == "verify_suite") return Mode::verify_suite;
    throw ConfigError("mode", "unknown mode '" + name +
                                  "' (decoupled, picard, minimal, price_american, verify_suite)");
}

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::decoupled: return "decoupled";
        case Mode::picard: return "picard";
        case Mode::minimal: return "minimal";
        case Mode::price_american: return "price_american";
        case Mode::verify_suite: return "verify_suite";
    }
    return "unknown";
}

RunConfig parse_config_text(const std::string& text, Mode mode) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("<file>", "config must be a JSON object");

    RunConfig c;
    c.mode = mode;
    if (const json* m = child(j, "mode")) {
        if (parse_mode(string_of(*m, "mode")) != mode) {
            throw ConfigError("mode", "config 'mode' disagrees with the command-line mode '" + mode_name(mode) + "'");
        }
    }
    if (const json* o = child(j, "output")) {
        if (!o->is_object()) throw ConfigError("output", "'output' must be an object");
        if (const json* d = child(*o, "dir")) c.out_dir = string_of(*d, "output.dir");
    }
    if (mode == Mode::verify_suite) return c;
    if (mode == Mode::price_american) {
        c.american = parse_american(object(j, "american", "american"), c.american_volatility);
        c.tolerance = number_or(j, "tolerance", "", c.american.tolerance);
        c.american.tolerance = c.tolerance;
        c.american.max_iter = integer_or(j, "max_iter", "", c.american.max_iter);
        return c;
    }

    c.lattice = parse_lattice(object(j, "lattice", "lattice"));
    c.barrier = parse_barrier(object(j, "barrier", "barrier"));
    if (const json* d = child(j, "driver")) {
        if (!d->is_object()) throw ConfigError("driver", "'driver' must be an object");
        c.pair = parse_driver(*d);
        c.driver_given = true;
    } else {
        c.pair = zero_driver();
    }
    if (const json* l = child(j, "lipschitz")) {
        if (!l->is_object()) throw ConfigError("lipschitz", "'lipschitz' must be an object");
        parse_lipschitz(*l, c.coeffs);
    } else if (mode == Mode::picard || mode == Mode::minimal) {
        throw ConfigError("lipschitz", "missing required key 'lipschitz'");
    }
    if (const json* b = child(j, "beta")) {
        c.beta = number(*b, "beta");
    }
    c.epsilon = number_or(j, "epsilon", "", c.epsilon);
    c.tolerance = number_or(j, "tolerance", "", c.tolerance);
    if (!(c.tolerance > 0.0)) throw ConfigError("tolerance", "'tolerance' must be > 0");
    c.max_iter = integer_or(j, "max_iter", "", c.max_iter);
    if (c.max_iter < 1) throw ConfigError("max_iter", "'max_iter' must be >= 1");

    if (mode == Mode::picard && c.pair.regime != Regime::lipschitz) {
        throw ConfigError("driver.regime", "picard mode needs a lipschitz-regime driver");
    }
    if (mode == Mode::minimal) {
        if (c.pair.regime != Regime::growth) {
            throw ConfigError("driver.regime", "minimal mode needs a growth-regime driver");
        }
        if (const json* m = child(j, "minimal")) {
            if (!m->is_object()) throw ConfigError("minimal", "'minimal' must be an object");
            c.n_max = integer_or(*m, "n_max", "minimal", c.n_max);
            if (c.n_max < 1) throw ConfigError("minimal.n_max", "'minimal.n_max' must be >= 1");
            if (const json* s = child(*m, "search")) {
                const std::string sp = "minimal.search";
                c.search.radius_y = number_or(*s, "radius_y", sp, c.search.radius_y);
                c.search.points_y = integer_or(*s, "points_y", sp, c.search.points_y);
                c.search.radius_z = number_or(*s, "radius_z", sp, c.search.radius_z);
                c.search.points_z = integer_or(*s, "points_z", sp, c.search.points_z);
                c.search.radius_u = number_or(*s, "radius_u", sp, c.search.radius_u);
                c.search.points_u = integer_or(*s, "points_u", sp, c.search.points_u);
            }
        }
    }
    return c;
}

LatticeConfig parse_lattice_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("lattice", std::string("lattice description is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("lattice", "lattice description must be a JSON object");
    return parse_lattice(j);
}

RunConfig load_config(const std::string& path, Mode mode) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str(), mode);
}

void apply_overrides(RunConfig& config, const Overrides& o) {
    if (o.out_dir) config.out_dir = *o.out_dir;
    if (o.beta) config.beta = *o.beta;
    if (o.refine < 1) throw ConfigError("--refine", "'--refine' must be >= 1");
    if (o.refine > 1) {
        config.lattice.n_steps *= o.refine;
        if (!config.lattice.knots.empty()) {
            throw ConfigError("lattice.knots", "'--refine' cannot be combined with explicit 'lattice.knots'");
        }
        if (!config.lattice.b_paths.empty()) {
            throw ConfigError("lattice.b_paths", "'--refine' cannot be combined with an explicit b-path list");
        }
        if (config.barrier.kind == BarrierSpec::Kind::deterministic_sequence ||
            config.barrier.kind == BarrierSpec::Kind::table) {
            throw ConfigError("barrier.values", "'--refine' cannot rescale explicit 'barrier.values'");
        }
        for (const auto* v : {&config.coeffs.gamma, &config.coeffs.kappa, &config.coeffs.sigma,
                              &config.coeffs.rho, &config.coeffs.zeta}) {
            if (v->size() > 1) throw ConfigError("lipschitz", "'--refine' needs scalar 'lipschitz' coefficients");
        }
        config.american.n_steps *= o.refine;
        // A volatility-specified walk follows the finer step; explicit up/down stay as given.
        if (config.american_volatility) {
            const double dt = config.american.horizon / config.american.n_steps;
            config.american.up = std::exp(*config.american_volatility * std::sqrt(dt));
            config.american.down = 1.0 / config.american.up;
        }
        if (config.american.rate.size() > 1) {
            std::vector<double> r;
            for (double x : config.american.rate) r.insert(r.end(), static_cast<std::size_t>(o.refine), x);
            config.american.rate = r;
        }
    }
    if (config.mode == Mode::picard && !config.beta) {
        throw ConfigError("beta", "missing required key 'beta' (picard mode; or pass --beta)");
    }
}

StochasticLipschitzData lipschitz_data(const RunConfig& config, int steps) {
    auto proc = [&](const std::vector<double>& v, const char* key) {
        if (v.size() == 1) return CoefficientProcess::constant(steps, v[0]);
        if (v.size() == static_cast<std::size_t>(steps)) return CoefficientProcess::per_step(v);
        throw ConfigError(std::string("lipschitz.") + key,
                          std::string("'lipschitz.") + key + "' needs one value or one per step");
    };
    StochasticLipschitzData d;
    d.gamma = proc(config.coeffs.gamma, "gamma");
    d.kappa = proc(config.coeffs.kappa, "kappa");
    d.sigma = proc(config.coeffs.sigma, "sigma");
    d.rho = proc(config.coeffs.rho, "rho");
    d.zeta = proc(config.coeffs.zeta, "zeta");
    d.alpha = config.coeffs.alpha;
    return d;
}

}  // namespace rbdsde
