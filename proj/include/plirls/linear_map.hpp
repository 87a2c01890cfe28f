#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "plirls/types.hpp"

namespace plirls {

/// A matrix or matrix-free operator with adjoint. Spectral norms are fixed
/// at construction: exact for dense maps up to 500x500 (via SVD), otherwise
/// estimated by power iteration with a 1.01 safety factor so that
/// operator_norm() and gram_norm() are always valid upper bounds.
class LinearMap {
  public:
    virtual ~LinearMap() = default;

    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    virtual void apply(Span x, MutSpan out) const = 0;
    virtual void adjoint_apply(Span u, MutSpan out) const = 0;

    /// Upper bound on ||B|| (spectral norm).
    double operator_norm() const { return op_norm_; }
    /// Upper bound on ||B^T B||.
    double gram_norm() const { return gram_norm_; }

    Vector apply(Span x) const;
    Vector adjoint_apply(Span u) const;

  protected:
    void set_norms(double op_norm, double gram_norm) {
        op_norm_ = op_norm;
        gram_norm_ = gram_norm;
    }
    /// Power iteration on B^T B (<=200 iterations, tol 1e-10), result
    /// inflated by 1.01. For use by maps without a closed-form norm.
    void estimate_norms();

  private:
    double op_norm_ = 0.0;
    double gram_norm_ = 0.0;
};

using LinearMapPtr = std::shared_ptr<const LinearMap>;

/// Dense row-major matrix map.
class DenseLinearMap : public LinearMap {
  public:
    using LinearMap::apply;
    using LinearMap::adjoint_apply;
    explicit DenseLinearMap(Matrix mat);

    std::size_t rows() const override { return mat_.rows; }
    std::size_t cols() const override { return mat_.cols; }
    void apply(Span x, MutSpan out) const override;
    void adjoint_apply(Span u, MutSpan out) const override;

    const Matrix &matrix() const { return mat_; }

  private:
    Matrix mat_;
};

/// x -> x_index, the 1 x n coordinate extraction e_i^T.
class CoordinateMap : public LinearMap {
  public:
    using LinearMap::apply;
    using LinearMap::adjoint_apply;
    CoordinateMap(std::size_t dim, std::size_t index);

    std::size_t rows() const override { return 1; }
    std::size_t cols() const override { return dim_; }
    void apply(Span x, MutSpan out) const override;
    void adjoint_apply(Span u, MutSpan out) const override;

  private:
    std::size_t dim_;
    std::size_t index_;
};

/// One row of a shared matrix as a 1 x n map (e_i^T A without copying A).
class MatrixRowMap : public LinearMap {
  public:
    using LinearMap::apply;
    using LinearMap::adjoint_apply;
    MatrixRowMap(std::shared_ptr<const Matrix> mat, std::size_t row);

    std::size_t rows() const override { return 1; }
    std::size_t cols() const override { return mat_->cols; }
    void apply(Span x, MutSpan out) const override;
    void adjoint_apply(Span u, MutSpan out) const override;

  private:
    std::shared_ptr<const Matrix> mat_;
    std::size_t row_;
};

class IdentityMap : public LinearMap {
  public:
    using LinearMap::apply;
    using LinearMap::adjoint_apply;
    explicit IdentityMap(std::size_t dim);

    std::size_t rows() const override { return dim_; }
    std::size_t cols() const override { return dim_; }
    void apply(Span x, MutSpan out) const override;
    void adjoint_apply(Span u, MutSpan out) const override;

  private:
    std::size_t dim_;
};

/// Matrix-free map given by apply/adjoint callbacks. Norms come from power
/// iteration at construction.
class CallbackMap : public LinearMap {
  public:
    using LinearMap::apply;
    using LinearMap::adjoint_apply;
    using Fn = std::function<void(Span, MutSpan)>;

    CallbackMap(std::size_t rows, std::size_t cols, Fn apply, Fn adjoint);

    std::size_t rows() const override { return rows_; }
    std::size_t cols() const override { return cols_; }
    void apply(Span x, MutSpan out) const override;
    void adjoint_apply(Span u, MutSpan out) const override;

  private:
    std::size_t rows_, cols_;
    Fn apply_, adjoint_;
};

/// Affine residual term B x - c with its cached offset norm.
struct AffineTerm {
    LinearMapPtr map;
    Vector offset;      // c
    double offset_norm; // ||c||_2

    AffineTerm(LinearMapPtr m, Vector c);
};

/// Largest singular value of a dense matrix (exact, via SVD).
double dense_operator_norm(const Matrix &mat);

} // namespace plirls
