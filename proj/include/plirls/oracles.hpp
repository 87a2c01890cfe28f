#pragma once

#include <functional>

#include "plirls/problem.hpp"
#include "plirls/types.hpp"

// Independent brute-force and finite-difference references backing the test
// suites and the self-check command. Deliberately slow and simple; kept in a
// separate library target, not part of the release surface.

namespace plirls::oracles {

/// Central differences per coordinate, step scaled by max(1, |x_i|).
/// Throws NumericalError on nonfinite evaluations.
Vector fd_gradient(const std::function<double(Span)> &fun, Span x, double step);

struct GridSpec {
    Vector lo;
    Vector hi;
    double step = 0.0;
};

struct GridResult {
    Vector point;
    double value = 0.0;
    /// set when a second minimum within tolerance lies more than two grid
    /// steps away, i.e. the grid is too coarse to certify the argmin
    bool ambiguous = false;
};

/// Global minimizer of term(x) + (c/2)||x - u||^2 over a lattice (dim <= 3).
GridResult prox_grid_argmin(const std::function<double(Span)> &term, Span u, double c,
                            const GridSpec &grid);

/// Exhaustive support enumeration for min lambda ||x||_0 + (c/2)||x - u||^2
/// (dim <= 20; sparsest solution preferred on ties).
struct CombinatorialResult {
    Vector point;
    double value = 0.0;
};
CombinatorialResult l0_prox_oracle(Span u, double lambda, double c);

/// Exhaustive projection onto {||x||_0 <= k}.
CombinatorialResult sparsity_projection_oracle(Span u, std::size_t k);

/// Minimum of lambda rank(X) + (c/2)||X - M||_F^2 over the Eckart-Young
/// truncations of M (lowest rank preferred on ties).
struct RankOracleResult {
    Matrix point;
    double value = 0.0;
    std::size_t rank = 0;
};
RankOracleResult rank_prox_oracle(const Matrix &m, double lambda, double c);

/// Dense grid minimum of the smoothed objective (dim <= 2).
struct GridMinResult {
    Vector x;
    double value = 0.0;
};
GridMinResult grid_minimize_F(const ProblemSpec &spec, const GridSpec &box);

/// Plain proximal-gradient reference for convex smoothed instances with
/// f = l1_lambda ||.||_1 and nu = 1: fixed step 1/(L_s + sum_i ||B_i^T B_i||/eps),
/// gradient assembled from raw map applications (independent of grad_h).
Vector reference_prox_gradient(const ProblemSpec &spec, double l1_lambda, Vector x0,
                               std::size_t iters);

} // namespace plirls::oracles
