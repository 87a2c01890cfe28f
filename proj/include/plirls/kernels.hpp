#pragma once

#include <cstddef>

namespace plirls::kernels {

/// Vector primitives behind the whole library. Every kernel has a scalar
/// reference implementation plus SIMD variants (AVX2 on x86-64, NEON on
/// aarch64) selected once at startup; PLIRLS_SIMD=scalar|avx2|neon overrides
/// the automatic choice. Elementwise kernels are bit-identical across
/// backends (no FMA contraction); the reductions (dot, nrm2sq, nrm2sq_diff)
/// may differ in the last bits because the summation order changes.
enum class Backend { Scalar, Avx2, Neon };

struct Ops {
    double (*dot)(const double *a, const double *b, std::size_t n);
    double (*nrm2sq)(const double *a, std::size_t n);
    double (*nrm2sq_diff)(const double *a, const double *b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double *x, double *y, std::size_t n);
    // out = x - alpha * g
    void (*scaled_sub)(const double *x, double alpha, const double *g, double *out,
                       std::size_t n);
    // out = sign(u) * max(|u| - t, 0)
    void (*soft_threshold)(const double *u, double t, double *out, std::size_t n);
    // out = min(max(u, lo), hi), elementwise bounds
    void (*clamp)(const double *u, const double *lo, const double *hi, double *out,
                  std::size_t n);
};

const Ops &scalar_ops();
/// Table for a specific backend, or nullptr when this CPU cannot run it.
const Ops *ops_for(Backend backend);

Backend active_backend();
void set_backend(Backend backend); // throws std::invalid_argument if unsupported
const char *backend_name(Backend backend);

// Convenience wrappers through the active backend.
double dot(const double *a, const double *b, std::size_t n);
double nrm2sq(const double *a, std::size_t n);
double nrm2sq_diff(const double *a, const double *b, std::size_t n);
double nrm2(const double *a, std::size_t n);
void axpy(double alpha, const double *x, double *y, std::size_t n);
void scaled_sub(const double *x, double alpha, const double *g, double *out,
                std::size_t n);
void soft_threshold(const double *u, double t, double *out, std::size_t n);
void clamp(const double *u, const double *lo, const double *hi, double *out,
           std::size_t n);

namespace detail {
const Ops *avx2_ops(); // nullptr unless built for x86-64 with AVX2+FMA at runtime
const Ops *neon_ops(); // nullptr unless built for aarch64
} // namespace detail

} // namespace plirls::kernels
