#pragma once

#include <functional>

#include "plirls/linear_map.hpp"
#include "plirls/solver.hpp"
#include "plirls/types.hpp"

namespace plirls {

/// Sparse + low-rank decomposition instance:
///   min  nw ||X||_* + lw ||Y||_1 + sum_i sqrt((A(X+Y)_i - b_i)^2 + eps^2)
/// over square matrices X, Y, with A acting on vectorized n x n matrices.
struct DecompositionSpec {
    LinearMapPtr a_op;
    std::size_t side = 0; // matrices are side x side; a_op->cols() == side^2
    Vector b;
    double epsilon = 0.0;
    double gamma = 1.1;
    double nuclear_weight = 1.0;
    double l1_weight = 1.0;
};

void validate_decomposition(const DecompositionSpec &spec);

struct BlockState {
    Matrix x;
    Matrix y;
    WeightVector z;
    double c_k = 0.0;
    double d_k = 0.0;
};

/// solver-core record plus the per-block step norms. rho1_witness holds the
/// plain objective drop (only monotonicity is guaranteed for the multiblock
/// scheme); rho2_witness is recorded as 0 since no multiblock rho2 constant
/// exists. w_norm is the PALM-style subgradient witness over both blocks.
struct MultiblockRecord {
    std::size_t k = 0;
    double objective = 0.0;
    double step_norm = 0.0;
    double w_norm = 0.0;
    double c_k = 0.0;
    double rho1_witness = 0.0;
    double rho2_witness = 0.0;
    double step_norm_x = 0.0;
    double step_norm_y = 0.0;
};

struct MultiblockOptions {
    std::size_t max_iters = 10000;
    /// <= 0 selects 1e-8 * (1 + ||X0||_F + ||Y0||_F); stopping tests the
    /// combined block step norm.
    double step_tol = 0.0;
    std::function<void(const BlockState &, const MultiblockRecord &)> on_iteration;
};

struct MultiblockResult {
    Matrix x;
    Matrix y;
    std::vector<MultiblockRecord> trace;
    SolveStatus status = SolveStatus::MaxIters;
};

/// Partial gradient of the coupling sum_i ((A(X+Y)_i - b_i)^2 + eps^2) z_i
/// with respect to X; identical for the Y block.
Matrix grad_H_X(const DecompositionSpec &spec, const Matrix &x, const Matrix &y,
                const WeightVector &z);
Matrix grad_H_Y(const DecompositionSpec &spec, const Matrix &x, const Matrix &y,
                const WeightVector &z);

/// z_i = 1 / (2 sqrt((A(X+Y)_i - b_i)^2 + eps^2)).
WeightVector multiblock_weights(const DecompositionSpec &spec, const Matrix &x,
                                const Matrix &y);

/// Smoothed multiblock objective at (X, Y).
double multiblock_objective(const DecompositionSpec &spec, const Matrix &x,
                            const Matrix &y);

/// Gauss-Seidel sweep: SVT on the X block, soft threshold on the Y block
/// (with the updated X), closed-form z refresh. Step moduli
/// c_k = d_k = gamma * 2 ||A||^2 ||z^k||_inf.
MultiblockRecord multiblock_step(const DecompositionSpec &spec, BlockState &state);

MultiblockResult run_multiblock(const DecompositionSpec &spec, Matrix x0, Matrix y0,
                                const MultiblockOptions &opts = {});

} // namespace plirls
