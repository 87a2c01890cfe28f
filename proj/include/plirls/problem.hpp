#pragma once

#include <functional>
#include <string>

#include "plirls/linear_map.hpp"
#include "plirls/types.hpp"

namespace plirls {

/// Differentiable term s with a global gradient-Lipschitz modulus L_s.
struct SmoothTerm {
    std::function<double(Span)> value;
    std::function<void(Span, MutSpan)> gradient;
    double lipschitz_modulus = 0.0;

    static SmoothTerm zero();
    /// s(x) = (scale/2) ||A x - b||^2 with L_s = scale * ||A^T A||.
    static SmoothTerm quadratic_loss(LinearMapPtr a, Vector b, double scale);
};

/// Extended-real term f with an easy proximal map. value may return +inf
/// (constraints); prox writes one element of prox_c^f(y) into out and
/// returns whether the argmin set had several elements (tie broken).
struct ProxFriendlyTerm {
    std::function<double(Span)> value;
    std::function<bool(Span y, double c, MutSpan out)> prox;
    std::string name = "custom";

    static ProxFriendlyTerm zero();
    static ProxFriendlyTerm l1(double lambda);
    static ProxFriendlyTerm l0(double lambda);
    static ProxFriendlyTerm sparsity_constraint(std::size_t k);
    static ProxFriendlyTerm l1_ball_constraint(double radius);
    static ProxFriendlyTerm box_constraint(Vector lower, Vector upper);
};

/// A full instance of the composite problem
///   min f(x) + s(x) + sum_i (||B_i x - c_i||^2 + epsilon^2)^(nu/2),
/// i.e. the epsilon-smoothed objective with exponent nu in (0, 1].
/// Instances are immutable after construction and safe to share.
struct ProblemSpec {
    ProxFriendlyTerm f;
    SmoothTerm s;
    std::vector<AffineTerm> terms;
    std::size_t dim = 0; // n; kept explicitly so m == 0 stays well-formed
    double epsilon = 0.0;
    double nu = 1.0;

    std::size_t num_terms() const { return terms.size(); }
};

/// Throws std::invalid_argument when shapes/parameters are inconsistent.
void validate_problem(const ProblemSpec &spec);

/// r_i = ||B_i x - c_i||_2 for every term.
Vector residual_norms(const ProblemSpec &spec, Span x);

/// p_i(x) = sqrt(r_i^2 + epsilon^2), 0-based term index.
double eval_p(const ProblemSpec &spec, Span x, std::size_t i);

/// F_eps(x) = f(x) + s(x) + sum_i (r_i^2 + eps^2)^(nu/2); may be +inf.
double eval_smoothed_objective(const ProblemSpec &spec, Span x);

/// Gradient of the smooth part h = s + sum_i (r_i^2 + eps^2)^(nu/2).
Vector grad_h(const ProblemSpec &spec, Span x);

/// Psi(x, y) = f(x) + s(x) + sum_i (r_i^2+eps^2) y_i + sum_i kappa / y_i^theta,
/// +inf outside the weight box. Throws on nonpositive weights.
double eval_auxiliary(const ProblemSpec &spec, Span x, Span y);

/// Exponent theta = nu / (2 - nu) of the auxiliary penalty g.
double aux_theta(double nu);
/// Coefficient kappa of g, fixed by the requirement that minimizing
/// Psi(x, .) recovers F_eps(x) exactly: kappa = ((2-nu)/2) * (nu/2)^theta.
/// (1/4 at nu = 1.)
double aux_kappa(double nu);
/// Upper end of the weight box (0, nu / (2 eps^(2-nu))].
double weight_box_bound(double nu, double epsilon);

namespace detail {
// Objective/gradient pieces on precomputed residual norms; shared by the
// solver so objective bookkeeping and the public entry points agree bitwise.
double smoothed_term_sum(const ProblemSpec &spec, Span resid);
void accumulate_term_gradient(const ProblemSpec &spec, Span x, Span scales,
                              MutSpan grad_out);
} // namespace detail

} // namespace plirls
