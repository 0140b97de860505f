#include "american.hpp"

#include "coefficients.hpp"
#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rbdsde {

namespace {

ScenarioLattice demo_lattice(const AmericanClaimConfig& c) {
    LatticeConfig lc;
    lc.n_steps = c.n_steps;
    lc.horizon = c.horizon;
    lc.recombining = true;
    lc.b_path_rule = "zero";
    return ScenarioLattice::build(lc);
}

double risk_neutral_q(double r, double dt, double up, double down) {
    return (1.0 + r * dt - down) / (up - down);
}

}  // namespace

std::vector<double> american_rates(const AmericanClaimConfig& c) {
    if (c.n_steps < 1) throw PreconditionError("american: n_steps must be >= 1");
    if (!(c.s0 > 0.0)) throw PreconditionError("american: s0 must be > 0");
    if (!(c.strike >= 0.0)) throw PreconditionError("american: strike must be >= 0");
    std::vector<double> r;
    if (c.rate.size() == 1) {
        r.assign(static_cast<std::size_t>(c.n_steps), c.rate[0]);
    } else if (c.rate.size() == static_cast<std::size_t>(c.n_steps)) {
        r = c.rate;
    } else {
        throw PreconditionError("american: rate needs one value or one per step");
    }
    const double dt = c.horizon / c.n_steps;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double growth = 1.0 + r[i] * dt;
        if (!(c.up > growth && growth > c.down)) {
            std::ostringstream os;
            os << "american: arbitrage lattice at step " << i << " (need up > 1 + r dt > down; up="
               << c.up << ", 1 + r dt=" << growth << ", down=" << c.down << ")";
            throw PreconditionError(os.str());
        }
    }
    return r;
}

AmericanResult price_american(const AmericanClaimConfig& c) {
    const auto rates = american_rates(c);
    ScenarioLattice lat = demo_lattice(c);
    const int n = lat.steps();

    BarrierSpec spec;
    spec.kind = BarrierSpec::Kind::put_payoff;
    spec.strike = c.strike;
    spec.s0 = c.s0;
    spec.up = c.up;
    spec.down = c.down;
    Barrier barrier = build_barrier(spec, lat);

    std::vector<double> theta(static_cast<std::size_t>(n));
    std::vector<double> gamma(static_cast<std::size_t>(n)), kappa(theta.size()), rho(theta.size());
    for (int i = 0; i < n; ++i) {
        const double dt = lat.grid().dt(i);
        const double q = risk_neutral_q(rates[i], dt, c.up, c.down);
        theta[i] = (2.0 * q - 1.0) / std::sqrt(dt);
        gamma[i] = std::abs(rates[i]);
        kappa[i] = std::abs(theta[i]);
        rho[i] = gamma[i] + kappa[i] * kappa[i] > 0.0 ? 0.0 : 1.0;
    }

    DriverPair pair;
    pair.name = "american_pricing";
    pair.f = [rates, theta](const DriverArgs& a) {
        const auto i = static_cast<std::size_t>(a.step);
        return -rates[i] * a.y + theta[i] * a.z[0];
    };

    StochasticLipschitzData data;
    data.gamma = CoefficientProcess::per_step(gamma);
    data.kappa = CoefficientProcess::per_step(kappa);
    data.sigma = CoefficientProcess::constant(n, 0.0);
    data.rho = CoefficientProcess::per_step(rho);
    data.zeta = CoefficientProcess::constant(n, 0.0);
    data.alpha = 0.25;

    PicardOptions opt;
    opt.epsilon = 0.5;
    opt.beta = std::max(beta_floor(opt.epsilon, data.alpha).beta0, 2.5);
    opt.tolerance = c.tolerance;
    opt.max_iter = c.max_iter;
    PicardResult pr = picard_solve(lat, pair, barrier, data, opt);

    AmericanResult res{pr.solution.paths[0].y[0], std::move(lat), std::move(barrier),
                       std::move(pr.solution), std::move(pr.trace), std::move(theta), rates};
    return res;
}

double binomial_american_reference(const AmericanClaimConfig& c) {
    const auto rates = american_rates(c);
    const int n = c.n_steps;
    const double dt = c.horizon / n;
    // v[j] holds the value after j up-moves at the current layer.
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    auto spot = [&](int i, int j) {
        double s = c.s0;
        for (int k = 0; k < j; ++k) s *= c.up;
        for (int k = 0; k < i - j; ++k) s *= c.down;
        return s;
    };
    for (int j = 0; j <= n; ++j) v[j] = std::max(c.strike - spot(n, j), 0.0);
    for (int i = n - 1; i >= 0; --i) {
        const double q = risk_neutral_q(rates[i], dt, c.up, c.down);
        for (int j = 0; j <= i; ++j) {
            const double cont = (q * v[j + 1] + (1.0 - q) * v[j]) / (1.0 + rates[i] * dt);
            v[j] = std::max(c.strike - spot(i, j), cont);
        }
    }
    return v[0];
}

}  // namespace rbdsde
