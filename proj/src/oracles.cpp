#include "plirls/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "plirls/kernels.hpp"

namespace plirls::oracles {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

Vector fd_gradient(const std::function<double(Span)> &fun, Span x, double step) {
    require(step > 0.0, "fd_gradient: step must be > 0");
    Vector grad(x.size());
    Vector probe(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::fabs(x[i]));
        const double saved = probe[i];
        probe[i] = saved + h;
        const double fp = fun(probe);
        probe[i] = saved - h;
        const double fm = fun(probe);
        probe[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericalError("fd_gradient: nonfinite evaluation");
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

GridResult prox_grid_argmin(const std::function<double(Span)> &term, Span u, double c,
                            const GridSpec &grid) {
    const std::size_t dim = u.size();
    require(dim >= 1 && dim <= 3, "prox_grid_argmin: dimension must be 1..3");
    require(grid.lo.size() == dim && grid.hi.size() == dim,
            "prox_grid_argmin: grid bounds must match the dimension");
    require(grid.step > 0.0, "prox_grid_argmin: step must be > 0");
    std::vector<std::size_t> counts(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        require(grid.lo[d] <= grid.hi[d], "prox_grid_argmin: empty box");
        counts[d] =
            static_cast<std::size_t>(std::floor((grid.hi[d] - grid.lo[d]) / grid.step)) +
            1;
    }

    GridResult best;
    best.value = kInf;
    double runner_up = kInf; // best value farther than 2 grid steps from the argmin
    Vector runner_point(dim);
    Vector point(dim);
    std::vector<std::size_t> idx(dim, 0);
    std::vector<std::size_t> best_idx(dim, 0);

    // two passes: locate the argmin, then look for a distant near-minimum
    for (int pass = 0; pass < 2; ++pass) {
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            for (std::size_t d = 0; d < dim; ++d)
                point[d] = grid.lo[d] + static_cast<double>(idx[d]) * grid.step;
            const double quad = 0.5 * c * kernels::nrm2sq_diff(point.data(), u.data(), dim);
            const double val = term(point) + quad;
            if (pass == 0) {
                if (val < best.value) {
                    best.value = val;
                    best.point = point;
                    best_idx = idx;
                }
            } else {
                std::size_t dist = 0;
                for (std::size_t d = 0; d < dim; ++d)
                    dist = std::max(dist, idx[d] > best_idx[d] ? idx[d] - best_idx[d]
                                                               : best_idx[d] - idx[d]);
                if (dist > 2 && val < runner_up) {
                    runner_up = val;
                    runner_point = point;
                }
            }
            std::size_t d = 0;
            while (d < dim && ++idx[d] == counts[d]) {
                idx[d] = 0;
                ++d;
            }
            if (d == dim)
                break;
        }
    }
    best.ambiguous = runner_up - best.value <= 1e-9;
    return best;
}

CombinatorialResult l0_prox_oracle(Span u, double lambda, double c) {
    const std::size_t n = u.size();
    require(n <= 20, "l0_prox_oracle: dimension too large for enumeration");
    require(lambda > 0.0 && c > 0.0, "l0_prox_oracle: lambda, c must be > 0");

    std::vector<std::uint32_t> masks(std::size_t{1} << n);
    std::iota(masks.begin(), masks.end(), 0u);
    std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        const int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });

    CombinatorialResult best;
    best.value = kInf;
    for (std::uint32_t mask : masks) {
        double val = lambda * std::popcount(mask);
        for (std::size_t i = 0; i < n; ++i)
            if (!(mask & (1u << i)))
                val += 0.5 * c * u[i] * u[i];
        if (val < best.value) { // strict: sparsest support wins ties
            best.value = val;
            best.point.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i))
                    best.point[i] = u[i];
        }
    }
    return best;
}

CombinatorialResult sparsity_projection_oracle(Span u, std::size_t k) {
    const std::size_t n = u.size();
    require(n <= 20, "sparsity_projection_oracle: dimension too large");
    require(k <= n, "sparsity_projection_oracle: k > dimension");

    CombinatorialResult best;
    best.value = kInf;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) > k)
            continue;
        double val = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!(mask & (1u << i)))
                val += u[i] * u[i];
        if (val < best.value) {
            best.value = val;
            best.point.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i))
                    best.point[i] = u[i];
        }
    }
    best.value = std::sqrt(best.value); // report the distance ||x - u||
    return best;
}

RankOracleResult rank_prox_oracle(const Matrix &m, double lambda, double c) {
    require(lambda > 0.0 && c > 0.0, "rank_prox_oracle: lambda, c must be > 0");
    using EigenRowMat =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const EigenRowMat> mapped(m.data.data(),
                                         static_cast<Eigen::Index>(m.rows),
                                         static_cast<Eigen::Index>(m.cols));
    Eigen::JacobiSVD<EigenRowMat> svd(mapped, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sigma = svd.singularValues();
    const auto q = sigma.size();

    // candidates are the Eckart-Young truncations r = 0..q
    RankOracleResult best;
    best.value = kInf;
    for (Eigen::Index r = 0; r <= q; ++r) {
        double tail = 0.0;
        for (Eigen::Index i = r; i < q; ++i)
            tail += sigma(i) * sigma(i);
        const double val = lambda * static_cast<double>(r) + 0.5 * c * tail;
        if (val < best.value) { // strict: lowest rank wins ties
            best.value = val;
            best.rank = static_cast<std::size_t>(r);
        }
    }
    Eigen::VectorXd kept = sigma;
    for (Eigen::Index i = static_cast<Eigen::Index>(best.rank); i < q; ++i)
        kept(i) = 0.0;
    EigenRowMat rec = svd.matrixU() * kept.asDiagonal() * svd.matrixV().transpose();
    best.point = Matrix(m.rows, m.cols);
    Eigen::Map<EigenRowMat>(best.point.data.data(), rec.rows(), rec.cols()) = rec;
    return best;
}

Vector reference_prox_gradient(const ProblemSpec &spec, double l1_lambda, Vector x0,
                               std::size_t iters) {
    require(spec.nu == 1.0, "reference_prox_gradient: nu must be 1");
    require(l1_lambda >= 0.0, "reference_prox_gradient: l1_lambda must be >= 0");
    require(x0.size() == spec.dim, "reference_prox_gradient: x0 has wrong length");

    // global modulus of the smooth part: each p_i has curvature <= ||B_i^T B_i||/eps
    double modulus = spec.s.lipschitz_modulus;
    for (const AffineTerm &term : spec.terms)
        modulus += term.map->gram_norm() / spec.epsilon;
    require(modulus > 0.0, "reference_prox_gradient: zero smooth modulus");
    const double step = 1.0 / modulus;
    const double eps2 = spec.epsilon * spec.epsilon;

    Vector x = std::move(x0);
    Vector grad(spec.dim), resid, back(spec.dim);
    for (std::size_t it = 0; it < iters; ++it) {
        spec.s.gradient(x, grad);
        for (const AffineTerm &term : spec.terms) {
            resid.resize(term.map->rows());
            term.map->apply(x, resid);
            kernels::axpy(-1.0, term.offset.data(), resid.data(), resid.size());
            const double rsq = kernels::nrm2sq(resid.data(), resid.size());
            const double scale = 1.0 / std::sqrt(rsq + eps2);
            term.map->adjoint_apply(resid, back);
            kernels::axpy(scale, back.data(), grad.data(), grad.size());
        }
        kernels::scaled_sub(x.data(), step, grad.data(), x.data(), x.size());
        kernels::soft_threshold(x.data(), l1_lambda * step, x.data(), x.size());
    }
    return x;
}

GridMinResult grid_minimize_F(const ProblemSpec &spec, const GridSpec &box) {
    require(spec.dim >= 1 && spec.dim <= 2, "grid_minimize_F: dimension must be 1 or 2");
    require(box.lo.size() == spec.dim && box.hi.size() == spec.dim,
            "grid_minimize_F: box must match the dimension");
    require(box.step > 0.0, "grid_minimize_F: step must be > 0");
    for (std::size_t d = 0; d < spec.dim; ++d)
        require(box.lo[d] <= box.hi[d], "grid_minimize_F: empty box");

    GridMinResult best;
    best.value = kInf;
    Vector point(spec.dim);
    if (spec.dim == 1) {
        const auto count =
            static_cast<std::size_t>(std::floor((box.hi[0] - box.lo[0]) / box.step)) + 1;
        for (std::size_t i = 0; i < count; ++i) {
            point[0] = box.lo[0] + static_cast<double>(i) * box.step;
            const double val = eval_smoothed_objective(spec, point);
            if (val < best.value) {
                best.value = val;
                best.x = point;
            }
        }
    } else {
        const auto c0 =
            static_cast<std::size_t>(std::floor((box.hi[0] - box.lo[0]) / box.step)) + 1;
        const auto c1 =
            static_cast<std::size_t>(std::floor((box.hi[1] - box.lo[1]) / box.step)) + 1;
        for (std::size_t i = 0; i < c0; ++i) {
            point[0] = box.lo[0] + static_cast<double>(i) * box.step;
            for (std::size_t j = 0; j < c1; ++j) {
                point[1] = box.lo[1] + static_cast<double>(j) * box.step;
                const double val = eval_smoothed_objective(spec, point);
                if (val < best.value) {
                    best.value = val;
                    best.x = point;
                }
            }
        }
    }
    return best;
}

} // namespace plirls::oracles
