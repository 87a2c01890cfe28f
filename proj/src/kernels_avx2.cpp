// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma on x86-64 only; whether the table is handed out is decided
// at runtime from cpuid, so the rest of the library stays portable.

#include "plirls/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <cmath>
#include <immintrin.h>

namespace plirls::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double *a, const double *b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double sum = hsum(acc);
    for (; i < n; ++i)
        sum += a[i] * b[i];
    return sum;
}

double nrm2sq_avx2(const double *a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double sum = hsum(acc);
    for (; i < n; ++i)
        sum += a[i] * a[i];
    return sum;
}

double nrm2sq_diff_avx2(const double *a, const double *b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double sum = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

// The elementwise kernels deliberately avoid FMA so that their results are
// bit-identical to the scalar reference; only the reductions fuse.
void axpy_avx2(double alpha, const double *x, double *y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + i),
                                  _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i)
        y[i] += alpha * x[i];
}

void scaled_sub_avx2(const double *x, double alpha, const double *g, double *out,
                     std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_sub_pd(_mm256_loadu_pd(x + i),
                                  _mm256_mul_pd(va, _mm256_loadu_pd(g + i)));
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i)
        out[i] = x[i] - alpha * g[i];
}

void soft_threshold_avx2(const double *u, double t, double *out, std::size_t n) {
    const __m256d vt = _mm256_set1_pd(t);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(u + i);
        __m256d mag = _mm256_max_pd(_mm256_sub_pd(_mm256_andnot_pd(sign_mask, v), vt),
                                    zero);
        __m256d r = _mm256_or_pd(mag, _mm256_and_pd(sign_mask, v));
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) {
        const double m = std::fabs(u[i]) - t;
        out[i] = std::copysign(m > 0.0 ? m : 0.0, u[i]);
    }
}

void clamp_avx2(const double *u, const double *lo, const double *hi, double *out,
                std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(u + i);
        v = _mm256_max_pd(v, _mm256_loadu_pd(lo + i));
        v = _mm256_min_pd(v, _mm256_loadu_pd(hi + i));
        _mm256_storeu_pd(out + i, v);
    }
    for (; i < n; ++i)
        out[i] = u[i] < lo[i] ? lo[i] : (u[i] > hi[i] ? hi[i] : u[i]);
}

const Ops kAvx2Ops = {
    dot_avx2,        nrm2sq_avx2,         nrm2sq_diff_avx2, axpy_avx2,
    scaled_sub_avx2, soft_threshold_avx2, clamp_avx2,
};

} // namespace

const Ops *avx2_ops() {
    static const bool supported =
        __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &kAvx2Ops : nullptr;
}

} // namespace plirls::kernels::detail

#endif // x86-64
