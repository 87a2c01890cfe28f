#include "plirls/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace plirls::kernels {

namespace {

double dot_scalar(const double *a, const double *b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += a[i] * b[i];
    return acc;
}

double nrm2sq_scalar(const double *a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += a[i] * a[i];
    return acc;
}

double nrm2sq_diff_scalar(const double *a, const double *b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy_scalar(double alpha, const double *x, double *y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += alpha * x[i];
}

void scaled_sub_scalar(const double *x, double alpha, const double *g, double *out,
                       std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] - alpha * g[i];
}

void soft_threshold_scalar(const double *u, double t, double *out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::fabs(u[i]) - t;
        // keep the sign of u even on the zeroed entries so every backend
        // produces the same bits
        out[i] = std::copysign(m > 0.0 ? m : 0.0, u[i]);
    }
}

void clamp_scalar(const double *u, const double *lo, const double *hi, double *out,
                  std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = u[i] < lo[i] ? lo[i] : (u[i] > hi[i] ? hi[i] : u[i]);
}

const Ops kScalarOps = {
    dot_scalar,        nrm2sq_scalar,         nrm2sq_diff_scalar, axpy_scalar,
    scaled_sub_scalar, soft_threshold_scalar, clamp_scalar,
};

struct BackendState {
    const Ops *ops;
    Backend which;
};

BackendState detect_backend() {
    if (const char *env = std::getenv("PLIRLS_SIMD")) {
        if (std::strcmp(env, "scalar") == 0)
            return {&kScalarOps, Backend::Scalar};
        if (std::strcmp(env, "avx2") == 0) {
            if (const Ops *ops = detail::avx2_ops())
                return {ops, Backend::Avx2};
        }
        if (std::strcmp(env, "neon") == 0) {
            if (const Ops *ops = detail::neon_ops())
                return {ops, Backend::Neon};
        }
        // Unknown or unsupported request falls through to auto-detection.
    }
    if (const Ops *ops = detail::avx2_ops())
        return {ops, Backend::Avx2};
    if (const Ops *ops = detail::neon_ops())
        return {ops, Backend::Neon};
    return {&kScalarOps, Backend::Scalar};
}

BackendState &state() {
    static BackendState s = detect_backend();
    return s;
}

} // namespace

const Ops &scalar_ops() { return kScalarOps; }

const Ops *ops_for(Backend backend) {
    switch (backend) {
    case Backend::Scalar: return &kScalarOps;
    case Backend::Avx2: return detail::avx2_ops();
    case Backend::Neon: return detail::neon_ops();
    }
    return nullptr;
}

Backend active_backend() { return state().which; }

void set_backend(Backend backend) {
    const Ops *ops = ops_for(backend);
    if (!ops)
        throw std::invalid_argument(std::string("kernel backend unavailable: ") +
                                    backend_name(backend));
    state() = {ops, backend};
}

const char *backend_name(Backend backend) {
    switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
    }
    return "?";
}

double dot(const double *a, const double *b, std::size_t n) {
    return state().ops->dot(a, b, n);
}
double nrm2sq(const double *a, std::size_t n) { return state().ops->nrm2sq(a, n); }
double nrm2sq_diff(const double *a, const double *b, std::size_t n) {
    return state().ops->nrm2sq_diff(a, b, n);
}
double nrm2(const double *a, std::size_t n) { return std::sqrt(nrm2sq(a, n)); }
void axpy(double alpha, const double *x, double *y, std::size_t n) {
    state().ops->axpy(alpha, x, y, n);
}
void scaled_sub(const double *x, double alpha, const double *g, double *out,
                std::size_t n) {
    state().ops->scaled_sub(x, alpha, g, out, n);
}
void soft_threshold(const double *u, double t, double *out, std::size_t n) {
    state().ops->soft_threshold(u, t, out, n);
}
void clamp(const double *u, const double *lo, const double *hi, double *out,
           std::size_t n) {
    state().ops->clamp(u, lo, hi, out, n);
}

#if !defined(__x86_64__) && !defined(_M_X64)
namespace detail {
const Ops *avx2_ops() { return nullptr; }
} // namespace detail
#endif

#if !defined(__aarch64__) && !defined(_M_ARM64)
namespace detail {
const Ops *neon_ops() { return nullptr; }
} // namespace detail
#endif

} // namespace plirls::kernels
