#include "varexp/varexp.h"

#include <algorithm>
#include <exception>
#include <new>
#include <string>

#include "analysis.hpp"
#include "errors.hpp"
#include "exponent.hpp"
#include "model.hpp"
#include "solver.hpp"
#include "stochastic.hpp"
#include "truncation.hpp"

struct varexp_exponent {
    varexp::ExponentFunction fn;
};

struct varexp_model {
    varexp::Model model;
    std::string id;
};

struct varexp_brownian {
    varexp::BrownianBatch batch;
};

struct varexp_paths {
    varexp::PathBatch batch;
};

namespace {

thread_local std::string last_error;

varexp_status fail(varexp_status status, const char* message) {
    last_error = message;
    return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
varexp_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return VAREXP_OK;
    } catch (const varexp::InvalidArgument& e) {
        return fail(VAREXP_ERR_INVALID_ARGUMENT, e.what());
    } catch (const varexp::DomainError& e) {
        return fail(VAREXP_ERR_DOMAIN, e.what());
    } catch (const varexp::HypothesisViolation& e) {
        return fail(VAREXP_ERR_HYPOTHESIS, e.what());
    } catch (const varexp::NumericError& e) {
        return fail(VAREXP_ERR_NUMERIC, e.what());
    } catch (const varexp::ResourceError& e) {
        return fail(VAREXP_ERR_RESOURCE, e.what());
    } catch (const std::bad_alloc&) {
        return fail(VAREXP_ERR_RESOURCE, "out of memory");
    } catch (const std::exception& e) {
        return fail(VAREXP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(VAREXP_ERR_INTERNAL, "unknown error");
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw varexp::InvalidArgument(what);
}

varexp::ModelParams to_params(const varexp_params* p) {
    if (!p) return {};
    return {p->kappa, p->theta, p->xi, p->v0};
}

varexp::TruncationParams to_truncation(varexp_truncation tp) {
    varexp::TruncationParams out = varexp::TruncationParams::with_default_epsilon(tp.n);
    if (tp.epsilon > 0.0) out.epsilon = tp.epsilon;
    out.validate();
    return out;
}

varexp::PositivityPolicy to_policy(int policy) {
    switch (policy) {
        case VAREXP_POLICY_FULL_TRUNCATION: return varexp::PositivityPolicy::FullTruncation;
        case VAREXP_POLICY_REFLECTION: return varexp::PositivityPolicy::Reflection;
        default: throw varexp::InvalidArgument("unknown positivity policy");
    }
}

varexp_model* wrap(varexp::Model model) {
    auto id = model.id();
    return new varexp_model{std::move(model), std::move(id)};
}

}  // namespace

extern "C" {

const char* varexp_version(void) { return "0.1.0"; }

const char* varexp_last_error(void) { return last_error.c_str(); }

const char* varexp_status_name(varexp_status status) {
    switch (status) {
        case VAREXP_OK: return "ok";
        case VAREXP_ERR_INVALID_ARGUMENT: return "invalid-argument";
        case VAREXP_ERR_DOMAIN: return "domain";
        case VAREXP_ERR_HYPOTHESIS: return "hypothesis";
        case VAREXP_ERR_NUMERIC: return "numeric";
        case VAREXP_ERR_RESOURCE: return "resource";
        case VAREXP_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

// Exponents

varexp_status varexp_exponent_make(const char* spec, varexp_exponent** out) {
    return guarded([&] {
        require(spec && out, "spec and out must not be NULL");
        *out = new varexp_exponent{varexp::make_builtin(spec)};
    });
}

varexp_status varexp_exponent_parse(const char* spec, varexp_exponent** out) {
    return guarded([&] {
        require(spec && out, "spec and out must not be NULL");
        *out = new varexp_exponent{varexp::parse_exponent(spec)};
    });
}

varexp_status varexp_exponent_custom(varexp_scalar_fn eval, varexp_scalar_fn deriv, void* user,
                                     double declared_pminus, double declared_pplus,
                                     double delta, double dsup, varexp_exponent** out) {
    return guarded([&] {
        require(eval && deriv && out, "eval, deriv and out must not be NULL");
        auto fn = varexp::ExponentFunction::custom(
            [eval, user](double x) { return eval(x, user); },
            [deriv, user](double x) { return deriv(x, user); }, declared_pminus,
            declared_pplus, delta, dsup);
        *out = new varexp_exponent{std::move(fn)};
    });
}

void varexp_exponent_free(varexp_exponent* fn) { delete fn; }

varexp_status varexp_exponent_name(const varexp_exponent* fn, const char** out) {
    return guarded([&] {
        require(fn && out, "handle and out must not be NULL");
        *out = fn->fn.name().c_str();
    });
}

varexp_status varexp_exponent_eval(const varexp_exponent* fn, double x, double* out) {
    return guarded([&] {
        require(fn && out, "handle and out must not be NULL");
        *out = varexp::eval_p(fn->fn, x);
    });
}

varexp_status varexp_exponent_deriv(const varexp_exponent* fn, double x, double* out) {
    return guarded([&] {
        require(fn && out, "handle and out must not be NULL");
        *out = varexp::eval_dp(fn->fn, x);
    });
}

void varexp_hypothesis_grid_default(varexp_hypothesis_grid* grid) {
    if (!grid) return;
    const varexp::HypothesisGrid g;
    *grid = {g.x_min, g.x_max, g.points, g.near_zero_points, g.band_n, g.tol};
}

varexp_status varexp_exponent_validate(const varexp_exponent* fn,
                                       const varexp_hypothesis_grid* grid,
                                       varexp_hypothesis_report* out) {
    return guarded([&] {
        require(fn && out, "handle and out must not be NULL");
        varexp::HypothesisGrid g;
        if (grid) {
            g = {grid->x_min, grid->x_max, grid->points, grid->near_zero_points, grid->band_n,
                 grid->tol};
        }
        const auto r = varexp::validate_hypotheses(fn->fn, g);
        *out = {r.observed_inf,
                r.observed_sup,
                r.observed_dsup_near_zero,
                r.observed_dsup_band,
                r.p_at_zero_plus,
                r.delta,
                r.grid.x_min,
                r.grid.x_max,
                r.grid.points,
                r.evaluated_points,
                r.pass ? 1 : 0,
                static_cast<int>(r.failing_clause)};
    });
}

const char* varexp_clause_name(int clause) {
    if (clause < 0 || clause > 3) return "unknown";
    return varexp::to_string(static_cast<varexp::HypothesisClause>(clause)).data();
}

// Models

void varexp_params_default(varexp_params* params) {
    if (!params) return;
    const varexp::ModelParams p;
    *params = {p.kappa, p.theta, p.xi, p.v0};
}

varexp_status varexp_model_parse(const char* spec, const varexp_params* params,
                                 varexp_model** out) {
    return guarded([&] {
        require(spec && out, "spec and out must not be NULL");
        *out = wrap(varexp::parse_model(spec, to_params(params)));
    });
}

varexp_status varexp_model_gm(const varexp_exponent* exponent, const varexp_params* params,
                              varexp_model** out) {
    return guarded([&] {
        require(exponent && out, "exponent and out must not be NULL");
        *out = wrap(varexp::Model::gm(to_params(params), exponent->fn));
    });
}

void varexp_model_free(varexp_model* model) { delete model; }

varexp_status varexp_model_id(const varexp_model* model, const char** out) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        *out = model->id.c_str();
    });
}

varexp_status varexp_model_params(const varexp_model* model, varexp_params* out) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        const auto& p = model->model.params();
        *out = {p.kappa, p.theta, p.xi, p.v0};
    });
}

varexp_status varexp_drift(const varexp_model* model, double x, double* out) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        *out = varexp::drift(model->model, x);
    });
}

varexp_status varexp_diffusion(const varexp_model* model, double x, double* out) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        *out = varexp::diffusion(model->model, x);
    });
}

varexp_status varexp_growth_constant(const varexp_model* model, double* out) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        *out = varexp::growth_constant(model->model);
    });
}

varexp_status varexp_feller_function(const varexp_model* model, double x, double* out) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        *out = varexp::feller_function(model->model, x);
    });
}

varexp_status varexp_generator_apply(const varexp_model* model, double x, double h1, double h2,
                                     double* out) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        *out = varexp::generator_apply(model->model, x, h1, h2);
    });
}

varexp_status varexp_feller_check(const varexp_model* model, varexp_feller_report* out,
                                  double* profile_x, double* profile_value, size_t capacity) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        const auto r = varexp::feller_check(model->model);
        *out = {r.analytic_limit,
                r.p_at_zero,
                static_cast<int>(r.criterion),
                static_cast<int>(r.verdict),
                r.profile_consistent ? 1 : 0,
                r.classical_applies ? 1 : 0,
                r.classical_lhs,
                r.classical_rhs,
                r.profile.size()};
        const std::size_t n = std::min(capacity, r.profile.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (profile_x) profile_x[i] = r.profile[i].x;
            if (profile_value) profile_value[i] = r.profile[i].value;
        }
    });
}

const char* varexp_feller_criterion_name(int criterion) {
    if (criterion < 0 || criterion > 3) return "unknown";
    return varexp::to_string(static_cast<varexp::FellerCriterion>(criterion)).data();
}

const char* varexp_feller_verdict_name(int verdict) {
    if (verdict < 0 || verdict > 2) return "unknown";
    return varexp::to_string(static_cast<varexp::FellerVerdict>(verdict)).data();
}

// Truncation

varexp_status varexp_theta_n(varexp_truncation tp, double r, double* out) {
    return guarded([&] {
        require(out != nullptr, "out must not be NULL");
        *out = varexp::theta_n(to_truncation(tp), r);
    });
}

varexp_status varexp_rho_n(varexp_truncation tp, double x, double* out) {
    return guarded([&] {
        require(out != nullptr, "out must not be NULL");
        *out = varexp::rho_n(to_truncation(tp), x);
    });
}

varexp_status varexp_truncated_drift(const varexp_model* model, varexp_truncation tp, double x,
                                     double* out) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        *out = varexp::truncated_drift(to_truncation(tp), model->model, x);
    });
}

varexp_status varexp_truncated_diffusion(const varexp_model* model, varexp_truncation tp,
                                         double x, double* out) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        *out = varexp::truncated_diffusion(to_truncation(tp), model->model, x);
    });
}

varexp_status varexp_lipschitz_constants(const varexp_model* model, varexp_truncation tp,
                                         int pairs, uint64_t seed,
                                         varexp_lipschitz_report* out) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        const auto r = varexp::lipschitz_constants(to_truncation(tp), model->model,
                                                   pairs > 0 ? pairs : 10000, seed);
        *out = {r.tp.n,   r.tp.epsilon, r.phi_prime_sup, r.p_prime_sup,
                r.p_plus, r.L_n,        r.C_n,           r.Lf_n,
                r.Lg_n,   r.Lhat_n,     r.empirical_sup_quotient,
                r.empirical_sup_quotient_f, r.sampled_pairs};
    });
}

// Brownian increments

varexp_status varexp_grid_steps(double T, double dt, int* n_steps) {
    return guarded([&] {
        require(n_steps != nullptr, "out must not be NULL");
        *n_steps = varexp::make_grid(T, dt).n_steps;
    });
}

varexp_status varexp_brownian_sample(uint64_t seed, size_t m_paths, double T, double dt,
                                     int threads, varexp_brownian** out) {
    return guarded([&] {
        require(out != nullptr, "out must not be NULL");
        *out = new varexp_brownian{
            varexp::sample_batch(seed, m_paths, varexp::make_grid(T, dt), threads)};
    });
}

void varexp_brownian_free(varexp_brownian* batch) { delete batch; }

size_t varexp_brownian_paths(const varexp_brownian* batch) {
    return batch ? batch->batch.m_paths() : 0;
}

int varexp_brownian_steps(const varexp_brownian* batch) {
    return batch ? batch->batch.grid().n_steps : 0;
}

varexp_status varexp_brownian_row(const varexp_brownian* batch, size_t path, const double** row,
                                  size_t* len) {
    return guarded([&] {
        require(batch && row && len, "handle and outputs must not be NULL");
        const auto r = batch->batch.row(path);
        *row = r.data();
        *len = r.size();
    });
}

uint64_t varexp_brownian_checksum(const varexp_brownian* batch) {
    return batch ? batch->batch.checksum() : 0;
}

varexp_status varexp_sample_row(uint64_t seed, uint64_t path, double T, double dt, double* out,
                                size_t len) {
    return guarded([&] {
        require(out != nullptr, "out must not be NULL");
        varexp::sample_row(seed, path, varexp::make_grid(T, dt), {out, len});
    });
}

// Solvers

varexp_status varexp_euler_path(const varexp_model* model, double T, double dt,
                                const double* increments, size_t len, int policy,
                                double* values, int* clamp_count) {
    return guarded([&] {
        require(model && increments && values, "handle and buffers must not be NULL");
        const auto path = varexp::euler_maruyama(model->model, varexp::make_grid(T, dt),
                                                 {increments, len}, to_policy(policy));
        std::copy(path.values.begin(), path.values.end(), values);
        if (clamp_count) *clamp_count = path.clamp_count;
    });
}

varexp_status varexp_euler_truncated(const varexp_model* model, varexp_truncation tp, double T,
                                     double dt, const double* increments, size_t len,
                                     double* values, int* negative_count) {
    return guarded([&] {
        require(model && increments && values, "handle and buffers must not be NULL");
        const auto path = varexp::euler_truncated(to_truncation(tp), model->model,
                                                  varexp::make_grid(T, dt), {increments, len});
        std::copy(path.values.begin(), path.values.end(), values);
        if (negative_count) *negative_count = path.clamp_count;
    });
}

varexp_status varexp_simulate(const varexp_model* model, const varexp_brownian* batch,
                              int policy, int threads, varexp_paths** out) {
    return guarded([&] {
        require(model && batch && out, "handles and out must not be NULL");
        *out = new varexp_paths{
            varexp::simulate_batch(model->model, batch->batch, to_policy(policy), threads)};
    });
}

void varexp_paths_free(varexp_paths* paths) { delete paths; }

size_t varexp_paths_count(const varexp_paths* paths) { return paths ? paths->batch.m_paths() : 0; }

int varexp_paths_steps(const varexp_paths* paths) {
    return paths ? paths->batch.grid().n_steps : 0;
}

double varexp_paths_dt(const varexp_paths* paths) { return paths ? paths->batch.grid().dt : 0.0; }

varexp_status varexp_paths_row(const varexp_paths* paths, size_t path, const double** values,
                               size_t* len) {
    return guarded([&] {
        require(paths && values && len, "handle and outputs must not be NULL");
        const auto r = paths->batch.path(path);
        *values = r.data();
        *len = r.size();
    });
}

varexp_status varexp_paths_clamp_count(const varexp_paths* paths, size_t path, int* out) {
    return guarded([&] {
        require(paths && out, "handle and out must not be NULL");
        require(path < paths->batch.m_paths(), "path index out of range");
        *out = paths->batch.clamp_counts()[path];
    });
}

varexp_status varexp_paths_clamp_stats(const varexp_paths* paths, varexp_clamp_stats* out) {
    return guarded([&] {
        require(paths && out, "handle and out must not be NULL");
        const auto s = paths->batch.clamp_stats();
        *out = {s.total_clamps, s.paths_with_clamps, s.clamp_fraction};
    });
}

varexp_status varexp_picard_solve(const varexp_model* model, varexp_truncation tp, double T,
                                  double dt, const double* increments, size_t len, double tol,
                                  int k_max, varexp_picard_summary* out, double* sup_diffs,
                                  size_t capacity, double* fixed_point) {
    return guarded([&] {
        require(model && increments && out, "handle, increments and out must not be NULL");
        const auto r = varexp::picard_solve(to_truncation(tp), model->model,
                                            varexp::make_grid(T, dt), {increments, len}, tol,
                                            k_max);
        *out = {r.iterations_used, r.converged ? 1 : 0,
                r.sup_diffs.empty() ? 0.0 : r.sup_diffs.back(), r.rate_envelope_constant,
                r.sup_diffs.size()};
        if (sup_diffs) {
            const std::size_t n = std::min(capacity, r.sup_diffs.size());
            std::copy_n(r.sup_diffs.begin(), n, sup_diffs);
        }
        if (fixed_point) {
            std::copy(r.fixed_point.values.begin(), r.fixed_point.values.end(), fixed_point);
        }
    });
}

varexp_status varexp_band_exit_index(const double* values, size_t len, int n, long long* index) {
    return guarded([&] {
        require((values || len == 0) && index, "buffers must not be NULL");
        const auto j = varexp::band_exit_index(std::span<const double>(values, len), n);
        *index = j ? static_cast<long long>(*j) : -1;
    });
}

// Analysis

varexp_status varexp_empirical_moment(const varexp_paths* paths, double t, int m, double* mean,
                                      double* stderr_out) {
    return guarded([&] {
        require(paths && mean, "handle and mean must not be NULL");
        const auto e = varexp::empirical_moment(paths->batch, t, m);
        *mean = e.mean;
        if (stderr_out) *stderr_out = e.std_error;
    });
}

varexp_status varexp_moment_bound(const varexp_params* params, int m, double t, double* C_m,
                                  double* bound) {
    return guarded([&] {
        const auto b = varexp::moment_bound(to_params(params), m, t);
        if (C_m) *C_m = b.C_m;
        if (bound) *bound = b.bound;
    });
}

varexp_status varexp_check_moment_bounds(const varexp_paths* paths, const varexp_params* params,
                                         const int* orders, size_t n_orders,
                                         const double* checkpoints, size_t n_checkpoints,
                                         varexp_moment_report* out) {
    return guarded([&] {
        require(paths && orders && checkpoints && out, "handles and buffers must not be NULL");
        const auto reports =
            varexp::check_moment_bounds(paths->batch, to_params(params), {orders, n_orders},
                                        {checkpoints, n_checkpoints});
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            out[i] = {r.order, r.t, r.empirical, r.std_error, r.theoretical_bound, r.C_m,
                      r.satisfied ? 1 : 0};
        }
    });
}

varexp_status varexp_second_moment_bound(const varexp_model* model, double T, double dt,
                                         double* out) {
    return guarded([&] {
        require(model && out, "handle and out must not be NULL");
        *out = varexp::second_moment_bound(model->model, varexp::make_grid(T, dt));
    });
}

varexp_status varexp_martingale_statistic(const varexp_model* model, double dt,
                                          const double* values, size_t len, double* out) {
    return guarded([&] {
        require(model && values && out, "handle and buffers must not be NULL");
        require(dt > 0.0, "dt must be > 0");
        varexp::TimeGrid grid{dt * static_cast<double>(len ? len - 1 : 0), dt,
                              static_cast<int>(len ? len - 1 : 0)};
        const auto mh = varexp::martingale_statistic(model->model, grid, {values, len});
        std::copy(mh.begin(), mh.end(), out);
    });
}

varexp_status varexp_martingale_report(const varexp_paths* paths, const varexp_model* model,
                                       const double* checkpoints, size_t n_checkpoints,
                                       double* means, double* stderrs,
                                       varexp_martingale_summary* out) {
    return guarded([&] {
        require(paths && model && checkpoints && out, "handles and buffers must not be NULL");
        const auto r =
            varexp::martingale_report(paths->batch, model->model, {checkpoints, n_checkpoints});
        if (means) std::copy(r.mh_means.begin(), r.mh_means.end(), means);
        if (stderrs) std::copy(r.mh_stderrs.begin(), r.mh_stderrs.end(), stderrs);
        *out = {r.max_abs_drift, r.bias_allowance, r.satisfied ? 1 : 0};
    });
}

varexp_status varexp_terminal_histogram(const varexp_paths* paths, double t, int n_bins,
                                        double* edges, long long* counts, double* densities,
                                        int* bins_used) {
    return guarded([&] {
        require(paths && edges && counts && densities && bins_used,
                "handle and buffers must not be NULL");
        const auto h = varexp::terminal_histogram(paths->batch, t, n_bins);
        std::copy(h.bin_edges.begin(), h.bin_edges.end(), edges);
        std::copy(h.counts.begin(), h.counts.end(), counts);
        std::copy(h.densities.begin(), h.densities.end(), densities);
        *bins_used = static_cast<int>(h.counts.size());
    });
}

varexp_status varexp_jensen_holds(const varexp_paths* paths, double t, int* out) {
    return guarded([&] {
        require(paths && out, "handle and out must not be NULL");
        *out = varexp::jensen_holds(paths->batch, t) ? 1 : 0;
    });
}

}  // extern "C"
