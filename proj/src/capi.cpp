#include "rbdsde/rbdsde.h"

#include "config.hpp"
#include "errors.hpp"
#include "experiment.hpp"

#include <string>

struct rbd_lattice {
    rbdsde::ScenarioLattice lattice;
};

struct rbd_run {
    rbdsde::ExperimentResult result;
};

namespace {

thread_local std::string last_error;

rbd_status fail(rbd_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

// Runs `body` and maps core exceptions onto status codes.
template <class F>
rbd_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return RBD_OK;
    } catch (const rbdsde::ConfigError& e) {
        return fail(RBD_ERR_CONFIG, std::string("[") + e.key() + "] " + e.what());
    } catch (const rbdsde::PreconditionError& e) {
        return fail(RBD_ERR_PRECONDITION, e.what());
    } catch (const rbdsde::HypothesisViolation& e) {
        return fail(RBD_ERR_PRECONDITION, e.what());
    } catch (const rbdsde::NumericError& e) {
        return fail(RBD_ERR_NUMERIC, e.what());
    } catch (const std::exception& e) {
        return fail(RBD_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(RBD_ERR_INTERNAL, "unknown error");
    }
}

}  // namespace

extern "C" {

const char* rbd_last_error(void) { return last_error.c_str(); }

rbd_status rbd_lattice_create(const char* lattice_json, rbd_lattice** out) {
    if (!lattice_json || !out) return fail(RBD_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto cfg = rbdsde::parse_lattice_text(lattice_json);
        *out = new rbd_lattice{rbdsde::ScenarioLattice::build(cfg)};
    });
}

void rbd_lattice_destroy(rbd_lattice* lattice) { delete lattice; }

rbd_status rbd_lattice_node_count(const rbd_lattice* lattice, size_t* out) {
    if (!lattice || !out) return fail(RBD_ERR_INVALID_ARGUMENT, "null argument");
    *out = lattice->lattice.node_count();
    last_error.clear();
    return RBD_OK;
}

rbd_status rbd_lattice_steps(const rbd_lattice* lattice, int* out) {
    if (!lattice || !out) return fail(RBD_ERR_INVALID_ARGUMENT, "null argument");
    *out = lattice->lattice.steps();
    last_error.clear();
    return RBD_OK;
}

rbd_status rbd_lattice_conditional_expectation(const rbd_lattice* lattice, const double* values,
                                               size_t count, size_t node, double* out) {
    if (!lattice || !values || !out) return fail(RBD_ERR_INVALID_ARGUMENT, "null argument");
    const auto& lat = lattice->lattice;
    if (count != lat.node_count()) return fail(RBD_ERR_INVALID_ARGUMENT, "values must have node_count entries");
    if (node >= lat.layer_begin(lat.steps())) return fail(RBD_ERR_INVALID_ARGUMENT, "node must be non-terminal");
    return guarded([&] { *out = rbdsde::conditional_expectation(lat, {values, count}, node); });
}

rbd_status rbd_beta_floor(double epsilon, double alpha, double* beta0) {
    if (!beta0) return fail(RBD_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *beta0 = rbdsde::beta_floor(epsilon, alpha).beta0; });
}

rbd_status rbd_price_american(double s0, double up, double down, double rate, double strike, int n_steps,
                              double horizon, double* price) {
    if (!price) return fail(RBD_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        rbdsde::AmericanClaimConfig c;
        c.s0 = s0;
        c.up = up;
        c.down = down;
        c.rate = {rate};
        c.strike = strike;
        c.n_steps = n_steps;
        c.horizon = horizon;
        *price = rbdsde::price_american(c).price;
    });
}

rbd_status rbd_run_create(const char* mode, const char* config_path, const char* out_dir, const double* beta,
                          int refine, rbd_run** out) {
    if (!mode || !out) return fail(RBD_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        rbdsde::Overrides o;
        if (out_dir) o.out_dir = std::string(out_dir);
        if (beta) o.beta = *beta;
        o.refine = refine;
        auto* run = new rbd_run{};
        try {
            run->result = rbdsde::run_from_file(rbdsde::parse_mode(mode), config_path ? config_path : "", o);
        } catch (const rbdsde::ConfigError& e) {
            run->result.exit_code = 2;
            run->result.message = std::string("config error [") + e.key() + "]: " + e.what();
        }
        *out = run;
    });
}

void rbd_run_destroy(rbd_run* run) { delete run; }

int rbd_run_exit_code(const rbd_run* run) { return run ? run->result.exit_code : 2; }

const char* rbd_run_message(const rbd_run* run) { return run ? run->result.message.c_str() : ""; }

size_t rbd_run_check_count(const rbd_run* run) { return run ? run->result.checks.size() : 0; }

rbd_status rbd_run_check(const rbd_run* run, size_t index, const char** name, int* pass, double* max_violation,
                         double* tolerance) {
    if (!run) return fail(RBD_ERR_INVALID_ARGUMENT, "null argument");
    if (index >= run->result.checks.size()) return fail(RBD_ERR_INVALID_ARGUMENT, "check index out of range");
    const auto& c = run->result.checks[index];
    if (name) *name = c.name.c_str();
    if (pass) *pass = c.pass ? 1 : 0;
    if (max_violation) *max_violation = c.max_violation;
    if (tolerance) *tolerance = c.tolerance;
    last_error.clear();
    return RBD_OK;
}

size_t rbd_run_file_count(const rbd_run* run) { return run ? run->result.files.size() : 0; }

const char* rbd_run_file(const rbd_run* run, size_t index) {
    if (!run || index >= run->result.files.size()) return nullptr;
    return run->result.files[index].c_str();
}

}  // extern "C"
