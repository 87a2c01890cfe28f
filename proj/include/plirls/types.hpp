#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plirls {

using Vector = std::vector<double>;
using Span = std::span<const double>;
using MutSpan = std::span<double>;

/// Dense row-major matrix. The only matrix storage used by the library;
/// factorizations are delegated to a linear-algebra backend internally.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vector data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double &operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double *row(std::size_t i) { return data.data() + i * cols; }
    const double *row(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return rows * cols; }
    bool same_shape(const Matrix &other) const {
        return rows == other.rows && cols == other.cols;
    }
};

/// Thrown when a numerical procedure cannot proceed (factorization failure,
/// nonfinite values inside a solver, ...). Argument/shape problems use
/// std::invalid_argument / std::out_of_range instead.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

inline void require(bool cond, const char *msg) {
    if (!cond)
        throw std::invalid_argument(msg);
}

} // namespace plirls
