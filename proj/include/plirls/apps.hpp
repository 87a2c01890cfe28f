#pragma once

#include "plirls/solver.hpp"

namespace plirls {

/// min (lambda/2) ||A x - b||^2 + sum_i (x_i^2 + eps^2)^(nu/2).
/// f vanishes, s is the quadratic loss, the affine terms are the coordinate
/// extractions (m = n); the generic iteration reduces to a reweighted
/// gradient step.
ProblemSpec build_sparse_lsq(const Matrix &a, const Vector &b, double lambda, double nu,
                             double epsilon);

/// min lambda ||x||_0 + sum_i sqrt((A x - b)_i^2 + eps^2).
/// f is the counting norm (hard-threshold prox), s vanishes, one affine term
/// per row of A (nu = 1).
ProblemSpec build_l0_regression(const Matrix &a, const Vector &b, double lambda,
                                double epsilon);

/// One iteration of the classical IR baseline for the sparse least squares
/// problem: solves (lambda A^T A + 2 Y(x)) x+ = lambda A^T b directly, with
/// Y(x) the diagonal reweighting of the current iterate.
Vector ir_baseline_step(const Matrix &a, const Vector &b, double lambda, double nu,
                        double epsilon, Span x);

struct IrBaselineResult {
    Vector x;
    Vector objectives; // smoothed objective after each solve
};

IrBaselineResult run_ir_baseline(const Matrix &a, const Vector &b, double lambda,
                                 double nu, double epsilon, Vector x0,
                                 std::size_t iters);

/// Regularized least-squares solution (A^T A + tiny ridge) \ A^T b; used as
/// a warm start for the nonconvex apps (x = 0 is always l0-critical).
Vector least_squares_start(const Matrix &a, const Vector &b);

/// min rank(X) + (1/lambda) sum_ij sqrt((D_ij - X_ij)^2 + eps^2),
/// solved on matrix iterates: entrywise-quadratic coupling, rank prox on the
/// forward point, closed-form weight refresh. The step modulus is the exact
/// coupling modulus (2/lambda) ||Y^k||_max (the Lemma-style profile does not
/// apply to the entrywise coupling).
struct LowRankProblem {
    Matrix d;
    double lambda = 1.0;
    double epsilon = 0.1;
};

LowRankProblem build_lowrank(Matrix d, double lambda, double epsilon);

struct LowRankResult {
    Matrix x;
    std::vector<IterationRecord> trace;
    SolveStatus status = SolveStatus::MaxIters;
    std::size_t final_rank = 0;
};

double lowrank_objective(const LowRankProblem &prob, const Matrix &x);

LowRankResult run_lowrank(const LowRankProblem &prob, Matrix x0,
                          const SolveOptions &opts = {});

} // namespace plirls
