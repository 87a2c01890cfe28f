#include "plirls/multiblock.hpp"

#include <cmath>

#include "plirls/kernels.hpp"
#include "plirls/prox.hpp"

namespace plirls {

namespace {

Vector coupling_residual(const DecompositionSpec &spec, const Matrix &x,
                         const Matrix &y) {
    Vector sum(x.data.size());
    for (std::size_t i = 0; i < sum.size(); ++i)
        sum[i] = x.data[i] + y.data[i];
    Vector r(spec.a_op->rows());
    spec.a_op->apply(sum, r);
    kernels::axpy(-1.0, spec.b.data(), r.data(), r.size());
    return r;
}

Matrix coupling_gradient(const DecompositionSpec &spec, const Vector &resid,
                         const WeightVector &z) {
    Vector weighted(resid.size());
    for (std::size_t i = 0; i < resid.size(); ++i)
        weighted[i] = 2.0 * z.w[i] * resid[i];
    Matrix g(spec.side, spec.side);
    spec.a_op->adjoint_apply(weighted, g.data);
    return g;
}

double l1_sum(const Matrix &m) {
    double s = 0.0;
    for (double v : m.data)
        s += std::fabs(v);
    return s;
}

} // namespace

void validate_decomposition(const DecompositionSpec &spec) {
    require(spec.a_op != nullptr, "DecompositionSpec: null operator");
    require(spec.side > 0, "DecompositionSpec: side must be positive");
    require(spec.a_op->cols() == spec.side * spec.side,
            "DecompositionSpec: a_op expects vectorized side x side matrices");
    require(spec.b.size() == spec.a_op->rows(), "DecompositionSpec: b length mismatch");
    require(spec.epsilon > 0.0, "DecompositionSpec: epsilon must be > 0");
    require(spec.gamma > 1.0, "DecompositionSpec: gamma must be > 1");
    require(spec.nuclear_weight > 0.0 && spec.l1_weight > 0.0,
            "DecompositionSpec: weights must be > 0");
}

Matrix grad_H_X(const DecompositionSpec &spec, const Matrix &x, const Matrix &y,
                const WeightVector &z) {
    require(x.rows == spec.side && x.cols == spec.side && y.same_shape(x),
            "grad_H_X: block shape mismatch");
    require(z.size() == spec.b.size(), "grad_H_X: weight count mismatch");
    Vector resid = coupling_residual(spec, x, y);
    return coupling_gradient(spec, resid, z);
}

Matrix grad_H_Y(const DecompositionSpec &spec, const Matrix &x, const Matrix &y,
                const WeightVector &z) {
    // the coupling depends on X + Y only
    return grad_H_X(spec, x, y, z);
}

WeightVector multiblock_weights(const DecompositionSpec &spec, const Matrix &x,
                                const Matrix &y) {
    Vector resid = coupling_residual(spec, x, y);
    WeightVector z;
    z.w.resize(resid.size());
    const double eps2 = spec.epsilon * spec.epsilon;
    for (std::size_t i = 0; i < resid.size(); ++i)
        z.w[i] = 0.5 / std::sqrt(resid[i] * resid[i] + eps2);
    return z;
}

double multiblock_objective(const DecompositionSpec &spec, const Matrix &x,
                            const Matrix &y) {
    Vector resid = coupling_residual(spec, x, y);
    const double eps2 = spec.epsilon * spec.epsilon;
    double data_term = 0.0;
    for (double r : resid)
        data_term += std::sqrt(r * r + eps2);
    return spec.nuclear_weight * nuclear_norm(x) + spec.l1_weight * l1_sum(y) +
           data_term;
}

MultiblockRecord multiblock_step(const DecompositionSpec &spec, BlockState &state) {
    const std::size_t n2 = spec.side * spec.side;
    const double zmax = state.z.max_abs();
    const double modulus = 2.0 * spec.a_op->gram_norm() * zmax;
    const double c = spec.gamma * modulus;
    if (!(std::isfinite(c) && c > 0.0))
        throw NumericalError("multiblock_step: step modulus not positive/finite");

    // objective at the incoming (X, Y); data term reuses the current residual
    Vector resid0 = coupling_residual(spec, state.x, state.y);
    const double eps2 = spec.epsilon * spec.epsilon;
    double data0 = 0.0;
    for (double r : resid0)
        data0 += std::sqrt(r * r + eps2);
    const double obj_prev = spec.nuclear_weight * nuclear_norm(state.x) +
                            spec.l1_weight * l1_sum(state.y) + data0;

    // X block: SVT on the forward point
    Matrix g_x = coupling_gradient(spec, resid0, state.z);
    Matrix forward_x(spec.side, spec.side);
    kernels::scaled_sub(state.x.data.data(), 1.0 / c, g_x.data.data(),
                        forward_x.data.data(), n2);
    double nuc_next = 0.0;
    Matrix x_next =
        detail::svt_nuclear_with_norm(forward_x, spec.nuclear_weight / c, &nuc_next);

    // Y block with the updated X (Gauss-Seidel order)
    Vector resid1 = coupling_residual(spec, x_next, state.y);
    Matrix g_y = coupling_gradient(spec, resid1, state.z);
    Matrix forward_y(spec.side, spec.side);
    kernels::scaled_sub(state.y.data.data(), 1.0 / c, g_y.data.data(),
                        forward_y.data.data(), n2);
    Matrix y_next(spec.side, spec.side);
    kernels::soft_threshold(forward_y.data.data(), spec.l1_weight / c,
                            y_next.data.data(), n2);

    // closed-form z refresh at the new pair
    Vector resid2 = coupling_residual(spec, x_next, y_next);
    WeightVector z_next;
    z_next.w.resize(resid2.size());
    for (std::size_t i = 0; i < resid2.size(); ++i)
        z_next.w[i] = 0.5 / std::sqrt(resid2[i] * resid2[i] + eps2);

    double data2 = 0.0;
    for (double r : resid2)
        data2 += std::sqrt(r * r + eps2);
    const double obj_next =
        spec.nuclear_weight * nuc_next + spec.l1_weight * l1_sum(y_next) + data2;
    if (!std::isfinite(obj_next))
        throw NumericalError("multiblock_step: objective not finite");

    // PALM-style subgradient witness over both blocks
    Matrix g_new = coupling_gradient(spec, resid2, z_next);
    double w_sq = 0.0;
    for (std::size_t i = 0; i < n2; ++i) {
        const double wx =
            c * (state.x.data[i] - x_next.data[i]) + g_new.data[i] - g_x.data[i];
        const double wy =
            c * (state.y.data[i] - y_next.data[i]) + g_new.data[i] - g_y.data[i];
        w_sq += wx * wx + wy * wy;
    }

    MultiblockRecord rec;
    rec.step_norm_x =
        std::sqrt(kernels::nrm2sq_diff(x_next.data.data(), state.x.data.data(), n2));
    rec.step_norm_y =
        std::sqrt(kernels::nrm2sq_diff(y_next.data.data(), state.y.data.data(), n2));
    rec.step_norm = std::sqrt(rec.step_norm_x * rec.step_norm_x +
                              rec.step_norm_y * rec.step_norm_y);
    rec.objective = obj_next;
    rec.w_norm = std::sqrt(w_sq);
    rec.c_k = c;
    rec.rho1_witness = obj_prev - obj_next;
    rec.rho2_witness = 0.0;

    state.x = std::move(x_next);
    state.y = std::move(y_next);
    state.z = std::move(z_next);
    state.c_k = c;
    state.d_k = c;
    return rec;
}

MultiblockResult run_multiblock(const DecompositionSpec &spec, Matrix x0, Matrix y0,
                                const MultiblockOptions &opts) {
    validate_decomposition(spec);
    require(x0.rows == spec.side && x0.cols == spec.side, "run_multiblock: bad X0 shape");
    require(y0.same_shape(x0), "run_multiblock: bad Y0 shape");
    require(opts.max_iters > 0, "run_multiblock: max_iters must be positive");

    const double scale0 = kernels::nrm2(x0.data.data(), x0.size()) +
                          kernels::nrm2(y0.data.data(), y0.size());
    const double step_tol = opts.step_tol > 0.0 ? opts.step_tol : 1e-8 * (1.0 + scale0);

    BlockState state;
    state.x = std::move(x0);
    state.y = std::move(y0);
    state.z = multiblock_weights(spec, state.x, state.y);

    MultiblockResult result;
    result.status = SolveStatus::MaxIters;
    for (std::size_t it = 0; it < opts.max_iters; ++it) {
        MultiblockRecord rec = multiblock_step(spec, state);
        rec.k = it + 1;
        result.trace.push_back(rec);
        if (opts.on_iteration)
            opts.on_iteration(state, rec);
        if (rec.step_norm <= step_tol) {
            result.status = SolveStatus::Converged;
            break;
        }
    }
    result.x = std::move(state.x);
    result.y = std::move(state.y);
    return result;
}

} // namespace plirls
