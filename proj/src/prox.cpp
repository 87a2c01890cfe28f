#include "plirls/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "plirls/kernels.hpp"

namespace plirls {

namespace {

using EigenRowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Full SVD is the only backend; anything bigger is rejected instead of
// silently switching to a randomized method.
constexpr std::size_t kSvdSizeLimit = 1000;

Eigen::BDCSVD<EigenRowMat> full_svd(const Matrix &m, const char *who) {
    if (m.rows > kSvdSizeLimit || m.cols > kSvdSizeLimit)
        throw std::invalid_argument(std::string(who) +
                                    ": matrices beyond 1000x1000 are not supported");
    Eigen::Map<const EigenRowMat> mapped(m.data.data(),
                                         static_cast<Eigen::Index>(m.rows),
                                         static_cast<Eigen::Index>(m.cols));
    Eigen::BDCSVD<EigenRowMat> svd(mapped, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw NumericalError(std::string(who) + ": SVD failed to converge");
    return svd;
}

Matrix reassemble(const Eigen::BDCSVD<EigenRowMat> &svd, const Eigen::VectorXd &sigma,
                  std::size_t rows, std::size_t cols) {
    EigenRowMat out =
        svd.matrixU() * sigma.asDiagonal() * svd.matrixV().transpose();
    Matrix result(rows, cols);
    Eigen::Map<EigenRowMat>(result.data.data(), out.rows(), out.cols()) = out;
    return result;
}

} // namespace

Vector soft_threshold(Span u, double threshold) {
    require(threshold >= 0.0, "soft_threshold: threshold must be >= 0");
    Vector out(u.size());
    kernels::soft_threshold(u.data(), threshold, out.data(), u.size());
    return out;
}

ProxResult hard_threshold_l0(Span u, double lambda, double c) {
    require(lambda > 0.0 && c > 0.0, "hard_threshold_l0: lambda and c must be > 0");
    const double t = std::sqrt(2.0 * lambda / c);
    ProxResult res;
    res.point.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = std::fabs(u[i]);
        if (a > t) {
            res.point[i] = u[i];
        } else {
            res.point[i] = 0.0;
            if (a == t)
                res.tie_broken = true; // argmin is {0, u_i}; take 0
        }
    }
    return res;
}

ProxResult project_sparsity(Span u, std::size_t k) {
    require(k <= u.size(), "project_sparsity: k > dimension");
    const std::size_t n = u.size();
    ProxResult res;
    res.point.assign(n, 0.0);
    if (k == 0)
        return res;
    if (k == n) {
        res.point.assign(u.begin(), u.end());
        return res;
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    // magnitude descending, lowest index first on equal magnitudes
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(u[a]) > std::fabs(u[b]);
    });
    for (std::size_t j = 0; j < k; ++j)
        res.point[idx[j]] = u[idx[j]];
    res.tie_broken = std::fabs(u[idx[k - 1]]) == std::fabs(u[idx[k]]);
    return res;
}

Vector project_l1_ball(Span u, double radius) {
    require(radius > 0.0, "project_l1_ball: radius must be > 0");
    const std::size_t n = u.size();
    double l1 = 0.0;
    for (double v : u)
        l1 += std::fabs(v);
    if (l1 <= radius)
        return Vector(u.begin(), u.end());
    Vector mags(n);
    for (std::size_t i = 0; i < n; ++i)
        mags[i] = std::fabs(u[i]);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        cumulative += mags[j];
        const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
        if (j + 1 == n || mags[j + 1] <= candidate) {
            theta = candidate;
            break;
        }
    }
    return soft_threshold(u, theta);
}

Vector project_box(Span u, Span lower, Span upper) {
    require(lower.size() == u.size() && upper.size() == u.size(),
            "project_box: bound dimensions must match");
    for (std::size_t i = 0; i < u.size(); ++i)
        require(lower[i] <= upper[i], "project_box: inverted bounds");
    Vector out(u.size());
    kernels::clamp(u.data(), lower.data(), upper.data(), out.data(), u.size());
    return out;
}

namespace detail {

Matrix svt_nuclear_with_norm(const Matrix &m, double threshold, double *out_nuclear) {
    require(threshold >= 0.0, "svt_nuclear: threshold must be >= 0");
    if (m.size() == 0) {
        if (out_nuclear)
            *out_nuclear = 0.0;
        return m;
    }
    auto svd = full_svd(m, "svt_nuclear");
    Eigen::VectorXd sigma = svd.singularValues();
    double nuc = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        sigma(i) = std::max(sigma(i) - threshold, 0.0);
        nuc += sigma(i);
    }
    if (out_nuclear)
        *out_nuclear = nuc;
    return reassemble(svd, sigma, m.rows, m.cols);
}

} // namespace detail

Matrix svt_nuclear(const Matrix &m, double threshold) {
    return detail::svt_nuclear_with_norm(m, threshold, nullptr);
}

MatrixProxResult rank_prox(const Matrix &m, double lambda, double c) {
    require(lambda > 0.0 && c > 0.0, "rank_prox: lambda and c must be > 0");
    if (m.size() == 0)
        return {m, false};
    auto svd = full_svd(m, "rank_prox");
    Eigen::VectorXd sigma = svd.singularValues();
    const double t = std::sqrt(2.0 * lambda / c);
    MatrixProxResult res;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > t) {
            ++res.rank;
            continue;
        }
        if (sigma(i) == t)
            res.tie_broken = true; // drop the singular value
        sigma(i) = 0.0;
    }
    res.point = reassemble(svd, sigma, m.rows, m.cols);
    return res;
}

double nuclear_norm(const Matrix &m) {
    if (m.size() == 0)
        return 0.0;
    auto svd = full_svd(m, "nuclear_norm");
    return svd.singularValues().sum();
}

Vector singular_values(const Matrix &m) {
    if (m.size() == 0)
        return {};
    auto svd = full_svd(m, "singular_values");
    const auto &sv = svd.singularValues();
    return Vector(sv.data(), sv.data() + sv.size());
}

} // namespace plirls
