#include <doctest.h>

#include <cmath>
#include <vector>

#include "plirls/instance_gen.hpp"
#include "plirls/kernels.hpp"

using namespace plirls;
namespace k = plirls::kernels;

namespace {

std::vector<double> random_vec(Rng &rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (double &x : v)
        x = scale * rng.normal();
    return v;
}

} // namespace

TEST_CASE("scalar reductions agree with long-double accumulation") {
    Rng rng(1);
    const auto a = random_vec(rng, 257), b = random_vec(rng, 257);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += static_cast<long double>(a[i]) * b[i];
    const double got = k::scalar_ops().dot(a.data(), b.data(), a.size());
    CHECK(got == doctest::Approx(static_cast<double>(acc)).epsilon(1e-13));
}

TEST_CASE("simd backends match the scalar reference") {
    Rng rng(2);
    for (k::Backend backend : {k::Backend::Avx2, k::Backend::Neon}) {
        const k::Ops *ops = k::ops_for(backend);
        if (!ops)
            continue;
        CAPTURE(k::backend_name(backend));
        for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3},
                              std::size_t{4}, std::size_t{8}, std::size_t{13},
                              std::size_t{128}, std::size_t{131}}) {
            const auto a = random_vec(rng, n, 2.0), b = random_vec(rng, n, 2.0);

            // reductions: summation order differs, compare with tolerance
            const double scale = 1.0 + std::fabs(k::scalar_ops().nrm2sq(a.data(), n));
            CHECK(std::fabs(ops->dot(a.data(), b.data(), n) -
                            k::scalar_ops().dot(a.data(), b.data(), n)) <=
                  1e-12 * scale);
            CHECK(std::fabs(ops->nrm2sq(a.data(), n) -
                            k::scalar_ops().nrm2sq(a.data(), n)) <= 1e-12 * scale);
            CHECK(std::fabs(ops->nrm2sq_diff(a.data(), b.data(), n) -
                            k::scalar_ops().nrm2sq_diff(a.data(), b.data(), n)) <=
                  1e-12 * scale);

            // elementwise kernels: bitwise identical
            std::vector<double> r1(n), r2(n);
            ops->scaled_sub(a.data(), 0.37, b.data(), r1.data(), n);
            k::scalar_ops().scaled_sub(a.data(), 0.37, b.data(), r2.data(), n);
            CHECK(r1 == r2);

            ops->soft_threshold(a.data(), 0.8, r1.data(), n);
            k::scalar_ops().soft_threshold(a.data(), 0.8, r2.data(), n);
            CHECK(r1 == r2);

            std::vector<double> y1 = b, y2 = b;
            ops->axpy(-1.75, a.data(), y1.data(), n);
            k::scalar_ops().axpy(-1.75, a.data(), y2.data(), n);
            CHECK(y1 == y2);

            const auto lo = random_vec(rng, n), hi_raw = random_vec(rng, n);
            std::vector<double> hi(n);
            for (std::size_t i = 0; i < n; ++i)
                hi[i] = lo[i] + std::fabs(hi_raw[i]);
            ops->clamp(a.data(), lo.data(), hi.data(), r1.data(), n);
            k::scalar_ops().clamp(a.data(), lo.data(), hi.data(), r2.data(), n);
            CHECK(r1 == r2);
        }
    }
}

TEST_CASE("soft threshold kernel semantics") {
    const std::vector<double> u = {3.0, -0.5, 0.0, 1.0, -2.5};
    std::vector<double> out(u.size());
    k::soft_threshold(u.data(), 1.0, out.data(), u.size());
    CHECK(out[0] == 2.0);
    CHECK(out[1] == 0.0);
    CHECK(out[2] == 0.0);
    CHECK(out[3] == 0.0);
    CHECK(out[4] == -1.5);
}

TEST_CASE("backend selection") {
    CHECK(k::ops_for(k::Backend::Scalar) == &k::scalar_ops());
    const k::Backend active = k::active_backend();
    CHECK(k::ops_for(active) != nullptr);
    // switching to scalar and back is always possible
    k::set_backend(k::Backend::Scalar);
    CHECK(k::active_backend() == k::Backend::Scalar);
    k::set_backend(active);
    CHECK(k::active_backend() == active);
}
