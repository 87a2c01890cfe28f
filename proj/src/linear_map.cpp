#include "plirls/linear_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "plirls/kernels.hpp"

namespace plirls {

namespace {

using EigenRowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const EigenRowMat> as_eigen(const Matrix &m) {
    return {m.data.data(), static_cast<Eigen::Index>(m.rows),
            static_cast<Eigen::Index>(m.cols)};
}

// Exact SVD only pays off for moderate sizes; beyond this the power
// iteration estimate (with safety factor) is used instead.
constexpr std::size_t kExactNormLimit = 500;

} // namespace

double dense_operator_norm(const Matrix &mat) {
    if (mat.size() == 0)
        return 0.0;
    Eigen::JacobiSVD<EigenRowMat> svd(as_eigen(mat));
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

Vector LinearMap::apply(Span x) const {
    Vector out(rows());
    apply(x, out);
    return out;
}

Vector LinearMap::adjoint_apply(Span u) const {
    Vector out(cols());
    adjoint_apply(u, out);
    return out;
}

void LinearMap::estimate_norms() {
    const std::size_t n = cols();
    if (n == 0 || rows() == 0) {
        set_norms(0.0, 0.0);
        return;
    }
    // Deterministic pseudo-random start so norms never depend on global state.
    Vector v(n);
    std::uint64_t s = 0x9e3779b97f4a7c15ull;
    for (std::size_t i = 0; i < n; ++i) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        v[i] = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
    }
    Vector bu(rows()), btbu(n);
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        apply(v, bu);
        adjoint_apply(bu, btbu);
        const double norm = kernels::nrm2(btbu.data(), btbu.size());
        if (norm == 0.0) {
            lambda = 0.0;
            break;
        }
        const double next = kernels::dot(v.data(), btbu.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = btbu[i] / norm;
        if (it > 0 && std::fabs(next - lambda) <= 1e-10 * std::max(1.0, next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda = std::max(lambda, 0.0);
    set_norms(1.01 * std::sqrt(lambda), 1.01 * lambda);
}

DenseLinearMap::DenseLinearMap(Matrix mat) : mat_(std::move(mat)) {
    if (mat_.rows <= kExactNormLimit && mat_.cols <= kExactNormLimit) {
        const double sigma = dense_operator_norm(mat_);
        set_norms(sigma, sigma * sigma);
    } else {
        estimate_norms();
    }
}

void DenseLinearMap::apply(Span x, MutSpan out) const {
    require(x.size() == mat_.cols && out.size() == mat_.rows,
            "DenseLinearMap::apply: dimension mismatch");
    for (std::size_t i = 0; i < mat_.rows; ++i)
        out[i] = kernels::dot(mat_.row(i), x.data(), mat_.cols);
}

void DenseLinearMap::adjoint_apply(Span u, MutSpan out) const {
    require(u.size() == mat_.rows && out.size() == mat_.cols,
            "DenseLinearMap::adjoint_apply: dimension mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < mat_.rows; ++i)
        kernels::axpy(u[i], mat_.row(i), out.data(), mat_.cols);
}

CoordinateMap::CoordinateMap(std::size_t dim, std::size_t index)
    : dim_(dim), index_(index) {
    require(index < dim, "CoordinateMap: index out of range");
    set_norms(1.0, 1.0);
}

void CoordinateMap::apply(Span x, MutSpan out) const {
    require(x.size() == dim_ && out.size() == 1, "CoordinateMap::apply: dimension mismatch");
    out[0] = x[index_];
}

void CoordinateMap::adjoint_apply(Span u, MutSpan out) const {
    require(u.size() == 1 && out.size() == dim_,
            "CoordinateMap::adjoint_apply: dimension mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    out[index_] = u[0];
}

MatrixRowMap::MatrixRowMap(std::shared_ptr<const Matrix> mat, std::size_t row)
    : mat_(std::move(mat)), row_(row) {
    require(mat_ != nullptr, "MatrixRowMap: null matrix");
    require(row_ < mat_->rows, "MatrixRowMap: row out of range");
    const double norm = kernels::nrm2(mat_->row(row_), mat_->cols);
    set_norms(norm, norm * norm);
}

void MatrixRowMap::apply(Span x, MutSpan out) const {
    require(x.size() == mat_->cols && out.size() == 1,
            "MatrixRowMap::apply: dimension mismatch");
    out[0] = kernels::dot(mat_->row(row_), x.data(), mat_->cols);
}

void MatrixRowMap::adjoint_apply(Span u, MutSpan out) const {
    require(u.size() == 1 && out.size() == mat_->cols,
            "MatrixRowMap::adjoint_apply: dimension mismatch");
    const double *row = mat_->row(row_);
    const double s = u[0];
    for (std::size_t j = 0; j < mat_->cols; ++j)
        out[j] = s * row[j];
}

IdentityMap::IdentityMap(std::size_t dim) : dim_(dim) { set_norms(1.0, 1.0); }

void IdentityMap::apply(Span x, MutSpan out) const {
    require(x.size() == dim_ && out.size() == dim_,
            "IdentityMap::apply: dimension mismatch");
    std::copy(x.begin(), x.end(), out.begin());
}

void IdentityMap::adjoint_apply(Span u, MutSpan out) const { apply(u, out); }

CallbackMap::CallbackMap(std::size_t rows, std::size_t cols, Fn apply, Fn adjoint)
    : rows_(rows), cols_(cols), apply_(std::move(apply)), adjoint_(std::move(adjoint)) {
    require(apply_ != nullptr && adjoint_ != nullptr, "CallbackMap: null callback");
    estimate_norms();
}

void CallbackMap::apply(Span x, MutSpan out) const {
    require(x.size() == cols_ && out.size() == rows_,
            "CallbackMap::apply: dimension mismatch");
    apply_(x, out);
}

void CallbackMap::adjoint_apply(Span u, MutSpan out) const {
    require(u.size() == rows_ && out.size() == cols_,
            "CallbackMap::adjoint_apply: dimension mismatch");
    adjoint_(u, out);
}

AffineTerm::AffineTerm(LinearMapPtr m, Vector c) : map(std::move(m)), offset(std::move(c)) {
    require(map != nullptr, "AffineTerm: null map");
    require(offset.size() == map->rows(), "AffineTerm: offset length != map rows");
    offset_norm = kernels::nrm2(offset.data(), offset.size());
}

} // namespace plirls
