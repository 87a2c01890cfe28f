#include "plirls/apps.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "plirls/kernels.hpp"
#include "plirls/prox.hpp"

namespace plirls {

namespace {

using EigenRowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const EigenRowMat> as_eigen(const Matrix &m) {
    return {m.data.data(), static_cast<Eigen::Index>(m.rows),
            static_cast<Eigen::Index>(m.cols)};
}

Vector sparse_lsq_weights(double nu, double epsilon, Span x) {
    Vector y(x.size());
    const double eps2 = epsilon * epsilon;
    if (nu == 1.0) {
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = 0.5 / std::sqrt(x[i] * x[i] + eps2);
    } else {
        const double e = 0.5 * (nu - 2.0);
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = 0.5 * nu * std::pow(x[i] * x[i] + eps2, e);
    }
    return y;
}

double sparse_lsq_objective(const Matrix &a, const Vector &b, double lambda, double nu,
                            double epsilon, Span x) {
    Vector r(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        r[i] = kernels::dot(a.row(i), x.data(), a.cols) - b[i];
    double obj = 0.5 * lambda * kernels::nrm2sq(r.data(), r.size());
    const double eps2 = epsilon * epsilon;
    if (nu == 1.0) {
        for (double v : x)
            obj += std::sqrt(v * v + eps2);
    } else {
        for (double v : x)
            obj += std::pow(v * v + eps2, 0.5 * nu);
    }
    return obj;
}

// Entrywise weights Y_ij = 1/(2 sqrt((D - X)_ij^2 + eps^2)) of the low-rank app.
Matrix lowrank_weights(const LowRankProblem &prob, const Matrix &x) {
    Matrix y(x.rows, x.cols);
    const double eps2 = prob.epsilon * prob.epsilon;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.data[i] - prob.d.data[i];
        y.data[i] = 0.5 / std::sqrt(d * d + eps2);
    }
    return y;
}

double lowrank_data_term(const LowRankProblem &prob, const Matrix &x) {
    const double eps2 = prob.epsilon * prob.epsilon;
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = prob.d.data[i] - x.data[i];
        sum += std::sqrt(d * d + eps2);
    }
    return sum / prob.lambda;
}

std::size_t numerical_rank(const Matrix &x) {
    Vector sv = singular_values(x);
    const double cutoff = 1e-10 * std::max(1.0, sv.empty() ? 0.0 : sv.front());
    std::size_t r = 0;
    for (double s : sv)
        r += s > cutoff;
    return r;
}

} // namespace

ProblemSpec build_sparse_lsq(const Matrix &a, const Vector &b, double lambda, double nu,
                             double epsilon) {
    require(a.rows > 0 && a.cols > 0, "build_sparse_lsq: empty matrix");
    require(b.size() == a.rows, "build_sparse_lsq: b length != rows of A");
    require(lambda > 0.0, "build_sparse_lsq: lambda must be > 0");
    require(nu > 0.0 && nu <= 1.0, "build_sparse_lsq: nu must lie in (0, 1]");
    require(epsilon > 0.0, "build_sparse_lsq: epsilon must be > 0");

    const std::size_t n = a.cols;
    ProblemSpec spec;
    spec.dim = n;
    spec.epsilon = epsilon;
    spec.nu = nu;
    spec.f = ProxFriendlyTerm::zero();
    spec.s = SmoothTerm::quadratic_loss(std::make_shared<DenseLinearMap>(a), b, lambda);
    spec.terms.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        spec.terms.emplace_back(std::make_shared<CoordinateMap>(n, i), Vector{0.0});
    return spec;
}

ProblemSpec build_l0_regression(const Matrix &a, const Vector &b, double lambda,
                                double epsilon) {
    require(a.rows > 0 && a.cols > 0, "build_l0_regression: empty matrix");
    require(b.size() == a.rows, "build_l0_regression: b length != rows of A");
    require(lambda > 0.0, "build_l0_regression: lambda must be > 0");
    require(epsilon > 0.0, "build_l0_regression: epsilon must be > 0");

    ProblemSpec spec;
    spec.dim = a.cols;
    spec.epsilon = epsilon;
    spec.nu = 1.0;
    spec.f = ProxFriendlyTerm::l0(lambda);
    spec.s = SmoothTerm::zero();
    auto shared = std::make_shared<Matrix>(a);
    spec.terms.reserve(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        spec.terms.emplace_back(std::make_shared<MatrixRowMap>(shared, i),
                                Vector{b[i]});
    return spec;
}

Vector ir_baseline_step(const Matrix &a, const Vector &b, double lambda, double nu,
                        double epsilon, Span x) {
    require(b.size() == a.rows, "ir_baseline_step: b length != rows of A");
    require(x.size() == a.cols, "ir_baseline_step: x length != cols of A");
    require(lambda > 0.0 && epsilon > 0.0, "ir_baseline_step: lambda, epsilon must be > 0");
    require(nu > 0.0 && nu <= 1.0, "ir_baseline_step: nu must lie in (0, 1]");

    const auto n = static_cast<Eigen::Index>(a.cols);
    Eigen::Map<const EigenRowMat> ea = as_eigen(a);
    Eigen::MatrixXd system = lambda * (ea.transpose() * ea);
    Vector y = sparse_lsq_weights(nu, epsilon, x);
    for (Eigen::Index i = 0; i < n; ++i)
        system(i, i) += 2.0 * y[static_cast<std::size_t>(i)];
    Eigen::Map<const Eigen::VectorXd> eb(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd rhs = lambda * (ea.transpose() * eb);

    // lambda A^T A is PSD and 2Y is positive diagonal, so the system is SPD;
    // the guard only fires on numerical breakdown.
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() != Eigen::Success)
        throw NumericalError("ir_baseline_step: linear system solve failed");
    Eigen::VectorXd sol = llt.solve(rhs);
    return Vector(sol.data(), sol.data() + sol.size());
}

IrBaselineResult run_ir_baseline(const Matrix &a, const Vector &b, double lambda,
                                 double nu, double epsilon, Vector x0,
                                 std::size_t iters) {
    IrBaselineResult res;
    res.x = std::move(x0);
    res.objectives.reserve(iters);
    for (std::size_t k = 0; k < iters; ++k) {
        res.x = ir_baseline_step(a, b, lambda, nu, epsilon, res.x);
        res.objectives.push_back(
            sparse_lsq_objective(a, b, lambda, nu, epsilon, res.x));
    }
    return res;
}

Vector least_squares_start(const Matrix &a, const Vector &b) {
    require(b.size() == a.rows, "least_squares_start: b length != rows of A");
    Eigen::Map<const EigenRowMat> ea = as_eigen(a);
    Eigen::MatrixXd system = ea.transpose() * ea;
    const double ridge = 1e-8 * std::max(1.0, system.trace());
    for (Eigen::Index i = 0; i < system.rows(); ++i)
        system(i, i) += ridge;
    Eigen::Map<const Eigen::VectorXd> eb(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() != Eigen::Success)
        throw NumericalError("least_squares_start: factorization failed");
    Eigen::VectorXd sol = llt.solve(ea.transpose() * eb);
    return Vector(sol.data(), sol.data() + sol.size());
}

LowRankProblem build_lowrank(Matrix d, double lambda, double epsilon) {
    require(d.rows > 0 && d.cols > 0, "build_lowrank: empty matrix");
    require(lambda > 0.0, "build_lowrank: lambda must be > 0");
    require(epsilon > 0.0, "build_lowrank: epsilon must be > 0");
    return LowRankProblem{std::move(d), lambda, epsilon};
}

double lowrank_objective(const LowRankProblem &prob, const Matrix &x) {
    require(x.same_shape(prob.d), "lowrank_objective: shape mismatch");
    return static_cast<double>(numerical_rank(x)) + lowrank_data_term(prob, x);
}

LowRankResult run_lowrank(const LowRankProblem &prob, Matrix x0,
                          const SolveOptions &opts) {
    require(x0.same_shape(prob.d), "run_lowrank: X0 shape mismatch");
    require(opts.gamma > 1.0, "run_lowrank: gamma must be > 1");
    require(opts.max_iters > 0, "run_lowrank: max_iters must be positive");

    const std::size_t nn = x0.size();
    const double x0_norm = kernels::nrm2(x0.data.data(), nn);
    const double step_tol = opts.step_tol > 0.0 ? opts.step_tol : 1e-8 * (1.0 + x0_norm);
    const double w_tol = opts.w_tol > 0.0 ? opts.w_tol : 1e-8 * (1.0 + x0_norm);
    const double rho2 = (opts.gamma + 1.0) / (prob.lambda * prob.epsilon);

    LowRankResult result;
    result.status = SolveStatus::MaxIters;
    result.x = std::move(x0);
    result.final_rank = numerical_rank(result.x);

    Matrix weights = lowrank_weights(prob, result.x);
    double objective =
        static_cast<double>(result.final_rank) + lowrank_data_term(prob, result.x);
    const double inv_lambda2 = 2.0 / prob.lambda;

    Matrix grad(result.x.rows, result.x.cols), forward(result.x.rows, result.x.cols);
    for (std::size_t it = 0; it < opts.max_iters; ++it) {
        double ymax = 0.0;
        for (double v : weights.data)
            ymax = std::max(ymax, v);
        // exact modulus of the entrywise coupling for fixed weights
        const double modulus = inv_lambda2 * ymax;
        const double c = opts.gamma * modulus;

        for (std::size_t i = 0; i < nn; ++i)
            grad.data[i] =
                inv_lambda2 * weights.data[i] * (result.x.data[i] - prob.d.data[i]);
        kernels::scaled_sub(result.x.data.data(), 1.0 / c, grad.data.data(),
                            forward.data.data(), nn);
        MatrixProxResult prox = rank_prox(forward, 1.0, c);

        Matrix weights_next = lowrank_weights(prob, prox.point);
        double w_sq = 0.0;
        for (std::size_t i = 0; i < nn; ++i) {
            const double g_new = inv_lambda2 * weights_next.data[i] *
                                 (prox.point.data[i] - prob.d.data[i]);
            const double wi =
                g_new - grad.data[i] + c * (result.x.data[i] - prox.point.data[i]);
            w_sq += wi * wi;
        }
        const double step_norm = std::sqrt(
            kernels::nrm2sq_diff(prox.point.data.data(), result.x.data.data(), nn));
        const double obj_next =
            static_cast<double>(prox.rank) + lowrank_data_term(prob, prox.point);
        if (!std::isfinite(obj_next))
            throw NumericalError("run_lowrank: objective not finite");

        IterationRecord rec;
        rec.k = it + 1;
        rec.objective = obj_next;
        rec.step_norm = step_norm;
        rec.w_norm = std::sqrt(w_sq);
        rec.c_k = c;
        rec.rho1_witness = (objective - obj_next) -
                           0.5 * (opts.gamma - 1.0) * modulus * step_norm * step_norm;
        rec.rho2_witness = rho2 * step_norm - rec.w_norm;
        result.trace.push_back(rec);

        result.x = std::move(prox.point);
        result.final_rank = prox.rank;
        weights = std::move(weights_next);
        objective = obj_next;

        if (step_norm <= step_tol && rec.w_norm <= w_tol) {
            result.status = SolveStatus::Converged;
            break;
        }
    }
    return result;
}

} // namespace plirls
