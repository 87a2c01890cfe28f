#pragma once

#include "plirls/types.hpp"

namespace plirls {

/// Output of a possibly set-valued proximal map. tie_broken is set exactly
/// when the argmin set had more than one element at this input; the returned
/// point is then the sparser / lower-rank selection.
struct ProxResult {
    Vector point;
    bool tie_broken = false;
};

struct MatrixProxResult {
    Matrix point;
    bool tie_broken = false;
    std::size_t rank = 0; // singular values kept (rank_prox only)
};

/// prox of lambda*||.||_1 with modulus c, parametrized by threshold = lambda/c.
Vector soft_threshold(Span u, double threshold);

/// prox of lambda*||.||_0 with modulus c: entrywise keep/zero at sqrt(2*lambda/c),
/// zero chosen (and flagged) at the boundary.
ProxResult hard_threshold_l0(Span u, double lambda, double c);

/// Euclidean projection onto {||x||_0 <= k}; ties at the k-th magnitude are
/// broken toward the lowest index and flagged.
ProxResult project_sparsity(Span u, std::size_t k);

/// Euclidean projection onto {||x||_1 <= radius} (sorted-threshold construction).
Vector project_l1_ball(Span u, double radius);

/// Entrywise clamp onto [lower, upper].
Vector project_box(Span u, Span lower, Span upper);

/// prox of threshold*||.||_* : soft-thresholds the singular values.
Matrix svt_nuclear(const Matrix &m, double threshold);

/// prox of lambda*rank(.) with modulus c: hard-thresholds the singular values
/// at sqrt(2*lambda/c) (Eckart-Young truncation).
MatrixProxResult rank_prox(const Matrix &m, double lambda, double c);

double nuclear_norm(const Matrix &m);

/// Singular values in descending order.
Vector singular_values(const Matrix &m);

namespace detail {
/// Shared SVT core that also reports the nuclear norm of the output, so
/// callers evaluating an objective do not need a second SVD.
Matrix svt_nuclear_with_norm(const Matrix &m, double threshold, double *out_nuclear);
} // namespace detail

} // namespace plirls
