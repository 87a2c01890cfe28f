#include "plirls/solver.hpp"

#include <cmath>
#include <limits>

#include "plirls/kernels.hpp"

namespace plirls {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool all_finite(Span v) {
    for (double x : v)
        if (!std::isfinite(x))
            return false;
    return true;
}

void refresh_profile(const ProblemSpec &spec, StepRule &rule) {
    rule.lipschitz_profile.resize(spec.num_terms());
    for (std::size_t i = 0; i < spec.terms.size(); ++i)
        rule.lipschitz_profile[i] = local_lipschitz_bound(spec.terms[i], spec.epsilon,
                                                          rule.tau);
}

} // namespace

double WeightVector::max_abs() const {
    double m = 0.0;
    for (double v : w)
        m = std::max(m, std::fabs(v));
    return m;
}

const char *status_name(SolveStatus status) {
    switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::Diverged: return "Diverged";
    }
    return "?";
}

double local_lipschitz_bound(const AffineTerm &term, double epsilon, double tau) {
    require(epsilon > 0.0 && tau > 0.0, "local_lipschitz_bound: epsilon, tau must be > 0");
    const double bnorm = term.map->operator_norm();
    const double gram = term.map->gram_norm();
    const double cnorm = term.offset_norm;
    return (bnorm * cnorm + gram * (2.0 * tau * bnorm + cnorm + epsilon)) /
           (epsilon * epsilon);
}

double step_modulus(double smooth_modulus, Span lipschitz_profile,
                    const WeightVector &y) {
    double l1 = 0.0;
    for (double v : lipschitz_profile)
        l1 += std::fabs(v);
    return smooth_modulus + l1 * y.max_abs();
}

WeightVector weight_update(const ProblemSpec &spec, Span x) {
    Vector resid = residual_norms(spec, x);
    WeightVector y;
    y.w.resize(resid.size());
    const double eps2 = spec.epsilon * spec.epsilon;
    if (spec.nu == 1.0) {
        for (std::size_t i = 0; i < resid.size(); ++i)
            y.w[i] = 0.5 / std::sqrt(resid[i] * resid[i] + eps2);
    } else {
        const double e = 0.5 * (spec.nu - 2.0);
        const double half_nu = 0.5 * spec.nu;
        for (std::size_t i = 0; i < resid.size(); ++i)
            y.w[i] = half_nu * std::pow(resid[i] * resid[i] + eps2, e);
    }
    return y;
}

Vector grad_H_x(const ProblemSpec &spec, Span x, const WeightVector &y) {
    require(x.size() == spec.dim, "grad_H_x: x has wrong length");
    require(y.size() == spec.num_terms(), "grad_H_x: weight count mismatch");
    Vector grad(spec.dim);
    spec.s.gradient(x, grad);
    Vector scales(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        scales[i] = 2.0 * y.w[i];
    detail::accumulate_term_gradient(spec, x, scales, grad);
    return grad;
}

namespace detail {

double rho2_constant(const ProblemSpec &spec, double gamma, Span lipschitz_profile) {
    double l1 = 0.0;
    for (double v : lipschitz_profile)
        l1 += std::fabs(v);
    const double ybar = weight_box_bound(spec.nu, spec.epsilon);
    return (gamma + 1.0) * spec.s.lipschitz_modulus + (gamma * ybar + 1.0) * l1;
}

} // namespace detail

SolverState make_initial_state(const ProblemSpec &spec, Vector x0) {
    require(x0.size() == spec.dim, "x0 has wrong length");
    SolverState st;
    st.x = std::move(x0);
    st.resid = residual_norms(spec, st.x);
    st.y = weight_update(spec, st.x);
    st.grad_H_prev = grad_H_x(spec, st.x, st.y);
    st.objective = spec.f.value(st.x) + spec.s.value(st.x) +
                   detail::smoothed_term_sum(spec, st.resid);
    return st;
}

std::optional<IterationRecord> plirls_step(const ProblemSpec &spec, SolverState &state,
                                           StepRule &rule, const SolveOptions &opts) {
    const std::size_t n = spec.dim;
    const Vector &g = state.grad_H_prev;
    if (!all_finite(g))
        throw NumericalError("plirls_step: nonfinite gradient at iterate " +
                             std::to_string(state.k));

    const double ck_gamma = opts.internal_ck_gamma_override > 0.0
                                ? opts.internal_ck_gamma_override
                                : rule.gamma;

    Vector forward(n), next(n);
    double modulus = 0.0, c_k = 0.0;
    while (true) {
        modulus = step_modulus(spec.s.lipschitz_modulus, rule.lipschitz_profile, state.y);
        c_k = ck_gamma * modulus;
        if (!(std::isfinite(c_k) && c_k > 0.0))
            throw NumericalError("plirls_step: step modulus not positive/finite");
        kernels::scaled_sub(state.x.data(), 1.0 / c_k, g.data(), forward.data(), n);
        spec.f.prox(forward, c_k, next);
        const double next_norm = kernels::nrm2(next.data(), n);
        if (next_norm <= rule.tau)
            break;
        // iterate left B(tau): enlarge, refresh the profile, redo once
        if (++rule.doublings > opts.max_tau_doublings)
            return std::nullopt;
        rule.tau = 2.0 * next_norm;
        refresh_profile(spec, rule);
    }

    const double step_norm =
        std::sqrt(kernels::nrm2sq_diff(next.data(), state.x.data(), n));

    WeightVector y_next = weight_update(spec, next);
    Vector g_next = grad_H_x(spec, next, y_next);
    if (!all_finite(g_next))
        throw NumericalError("plirls_step: nonfinite gradient after step " +
                             std::to_string(state.k));

    // w^{k+1} = grad_x H(x^{k+1}, y^{k+1}) - grad_x H(x^k, y^k) + c_k (x^k - x^{k+1})
    double w_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = g_next[i] - g[i] + c_k * (state.x[i] - next[i]);
        w_sq += wi * wi;
    }
    const double w_norm = std::sqrt(w_sq);

    Vector resid_next = residual_norms(spec, next);
    const double f_next = spec.f.value(next) + spec.s.value(next) +
                          detail::smoothed_term_sum(spec, resid_next);
    if (!std::isfinite(f_next))
        throw NumericalError("plirls_step: objective not finite after step " +
                             std::to_string(state.k));

    IterationRecord rec;
    rec.k = state.k + 1;
    rec.objective = f_next;
    rec.step_norm = step_norm;
    rec.w_norm = w_norm;
    rec.c_k = c_k;
    rec.rho1_witness = (state.objective - f_next) -
                       0.5 * (rule.gamma - 1.0) * modulus * step_norm * step_norm;
    rec.rho2_witness =
        detail::rho2_constant(spec, rule.gamma, rule.lipschitz_profile) * step_norm -
        w_norm;

    state.x = std::move(next);
    state.y = std::move(y_next);
    state.grad_H_prev = std::move(g_next);
    state.resid = std::move(resid_next);
    state.objective = f_next;
    state.c_prev = c_k;
    state.k = rec.k;
    return rec;
}

SolveResult run_plirls(const ProblemSpec &spec, Vector x0, const SolveOptions &opts) {
    validate_problem(spec);
    require(opts.gamma > 1.0, "run_plirls: gamma must be > 1");
    require(opts.max_iters > 0, "run_plirls: max_iters must be positive");
    require(opts.step_tol >= 0.0 && opts.w_tol >= 0.0,
            "run_plirls: tolerances must be nonnegative");

    SolverState state = make_initial_state(spec, std::move(x0));
    const double x0_norm = kernels::nrm2(state.x.data(), state.x.size());

    StepRule rule;
    rule.gamma = opts.gamma;
    rule.tau = opts.tau0 > 0.0 ? std::max(opts.tau0, x0_norm)
                               : 10.0 * std::max(1.0, x0_norm);
    refresh_profile(spec, rule);

    const double step_tol = opts.step_tol > 0.0 ? opts.step_tol : 1e-8 * (1.0 + x0_norm);
    const double w_tol = opts.w_tol > 0.0 ? opts.w_tol : 1e-8 * (1.0 + x0_norm);

    SolveResult result;
    result.status = SolveStatus::MaxIters;
    result.trace.reserve(std::min<std::size_t>(opts.max_iters, 4096));
    for (std::size_t it = 0; it < opts.max_iters; ++it) {
        std::optional<IterationRecord> rec = plirls_step(spec, state, rule, opts);
        if (!rec) {
            result.status = SolveStatus::Diverged;
            break;
        }
        result.trace.push_back(*rec);
        if (opts.on_iteration)
            opts.on_iteration(state, rule, *rec);
        if (rec->step_norm <= step_tol && rec->w_norm <= w_tol) {
            result.status = SolveStatus::Converged;
            break;
        }
    }
    result.x = std::move(state.x);
    return result;
}

} // namespace plirls
