#pragma once

#include <functional>
#include <optional>

#include "plirls/problem.hpp"

namespace plirls {

/// Auxiliary weights y, one per affine term, living in (0, nu/(2 eps^(2-nu))].
struct WeightVector {
    Vector w;

    std::size_t size() const { return w.size(); }
    double max_abs() const;
};

/// Step-modulus state: gamma > 1, trust radius tau covering all iterates
/// seen so far, and the per-term local Lipschitz profile L_i^tau.
struct StepRule {
    double gamma = 1.1;
    double tau = 0.0;
    Vector lipschitz_profile;
    int doublings = 0; // tau enlargements performed so far
};

struct SolverState {
    Vector x;
    WeightVector y;
    double c_prev = 0.0;
    Vector grad_H_prev;  // cached grad_x H(x, y)
    std::size_t k = 0;
    // caches kept consistent with x
    Vector resid;
    double objective = 0.0;
};

/// Per-iteration diagnostics. rho1_witness is the sufficient-decrease slack
/// against the strong-form constant ((gamma-1)/2) L(tau, y^k) (>= the
/// published (gamma-1) L_s / 2); rho2_witness is the slack in the
/// subgradient bound ||w^k|| <= rho2 ||x^k - x^{k-1}||. Both are guaranteed
/// nonnegative (up to float slack) for nu = 1.
struct IterationRecord {
    std::size_t k = 0;
    double objective = 0.0;
    double step_norm = 0.0;
    double w_norm = 0.0;
    double c_k = 0.0;
    double rho1_witness = 0.0;
    double rho2_witness = 0.0;
};

enum class SolveStatus { Converged, MaxIters, Diverged };
const char *status_name(SolveStatus status);

struct SolveOptions {
    double gamma = 1.1;
    /// <= 0 selects the default 10 * max(1, ||x0||).
    double tau0 = 0.0;
    std::size_t max_iters = 100000;
    /// <= 0 selects the default 1e-8 * (1 + ||x0||).
    double step_tol = 0.0;
    double w_tol = 0.0;
    int max_tau_doublings = 60;
    /// Observer invoked after every accepted iteration (diagnostics, tests).
    std::function<void(const SolverState &, const StepRule &, const IterationRecord &)>
        on_iteration;
    /// Fault-injection hook for the self-check suite: when > 0 the step
    /// modulus c_k is computed with this gamma while every witness keeps
    /// using the nominal gamma above. Not part of the public contract.
    double internal_ck_gamma_override = 0.0;
};

struct SolveResult {
    Vector x;
    std::vector<IterationRecord> trace;
    SolveStatus status = SolveStatus::MaxIters;
};

/// L_i^tau = (||B_i|| ||c_i|| + ||B_i^T B_i|| (2 tau ||B_i|| + ||c_i|| + eps)) / eps^2.
double local_lipschitz_bound(const AffineTerm &term, double epsilon, double tau);

/// L(tau, y) = L_s + ||L_p^tau||_1 * ||y||_inf.
double step_modulus(double smooth_modulus, Span lipschitz_profile,
                    const WeightVector &y);

/// y_i = (nu/2) (r_i^2 + eps^2)^((nu-2)/2); reduces to 1/(2 sqrt(r_i^2+eps^2))
/// at nu = 1.
WeightVector weight_update(const ProblemSpec &spec, Span x);

/// grad_x H(x, y) = grad s(x) + sum_i 2 y_i B_i^T (B_i x - c_i). Equals
/// grad_h(x) exactly when y = weight_update(x).
Vector grad_H_x(const ProblemSpec &spec, Span x, const WeightVector &y);

/// One prox-linearized step: c_k = gamma L(tau, y^k), forward point, prox,
/// weight refresh, diagnostics. Enlarges rule.tau (and redoes the step) when
/// the new iterate leaves the trust ball; returns nullopt once the doubling
/// budget is exhausted (caller reports Diverged).
std::optional<IterationRecord> plirls_step(const ProblemSpec &spec, SolverState &state,
                                           StepRule &rule, const SolveOptions &opts = {});

SolverState make_initial_state(const ProblemSpec &spec, Vector x0);

SolveResult run_plirls(const ProblemSpec &spec, Vector x0, const SolveOptions &opts = {});

namespace detail {
/// rho2 constant ((gamma+1) L_s + (gamma ybar + 1) ||L_p^tau||_1 with
/// ybar the weight-box bound; the published Lemma constant at nu = 1.
double rho2_constant(const ProblemSpec &spec, double gamma, Span lipschitz_profile);
} // namespace detail

} // namespace plirls
