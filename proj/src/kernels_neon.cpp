// NEON kernel variants for aarch64. Mirrors kernels_avx2.cpp: reductions may
// fuse, elementwise kernels keep separate multiply/add so they match the
// scalar reference bit for bit.

#include "plirls/kernels.hpp"

#if defined(__aarch64__) || defined(_M_ARM64)

#include <arm_neon.h>
#include <cmath>

namespace plirls::kernels::detail {

namespace {

double dot_neon(const double *a, const double *b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i)
        sum += a[i] * b[i];
    return sum;
}

double nrm2sq_neon(const double *a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(a + i);
        acc = vfmaq_f64(acc, v, v);
    }
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i)
        sum += a[i] * a[i];
    return sum;
}

double nrm2sq_diff_neon(const double *a, const double *b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

void axpy_neon(double alpha, const double *x, double *y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t r = vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i)));
        vst1q_f64(y + i, r);
    }
    for (; i < n; ++i)
        y[i] += alpha * x[i];
}

void scaled_sub_neon(const double *x, double alpha, const double *g, double *out,
                     std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t r = vsubq_f64(vld1q_f64(x + i), vmulq_f64(va, vld1q_f64(g + i)));
        vst1q_f64(out + i, r);
    }
    for (; i < n; ++i)
        out[i] = x[i] - alpha * g[i];
}

void soft_threshold_neon(const double *u, double t, double *out, std::size_t n) {
    const float64x2_t vt = vdupq_n_f64(t);
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(u + i);
        float64x2_t mag = vmaxq_f64(vsubq_f64(vabsq_f64(v), vt), zero);
        // restore signs
        uint64x2_t sign =
            vandq_u64(vreinterpretq_u64_f64(v), vdupq_n_u64(0x8000000000000000ull));
        float64x2_t r = vreinterpretq_f64_u64(vorrq_u64(vreinterpretq_u64_f64(mag), sign));
        vst1q_f64(out + i, r);
    }
    for (; i < n; ++i) {
        const double m = std::fabs(u[i]) - t;
        out[i] = std::copysign(m > 0.0 ? m : 0.0, u[i]);
    }
}

void clamp_neon(const double *u, const double *lo, const double *hi, double *out,
                std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(u + i);
        v = vmaxq_f64(v, vld1q_f64(lo + i));
        v = vminq_f64(v, vld1q_f64(hi + i));
        vst1q_f64(out + i, v);
    }
    for (; i < n; ++i)
        out[i] = u[i] < lo[i] ? lo[i] : (u[i] > hi[i] ? hi[i] : u[i]);
}

const Ops kNeonOps = {
    dot_neon,        nrm2sq_neon,         nrm2sq_diff_neon, axpy_neon,
    scaled_sub_neon, soft_threshold_neon, clamp_neon,
};

} // namespace

const Ops *neon_ops() { return &kNeonOps; }

} // namespace plirls::kernels::detail

#endif // aarch64
