#include <doctest.h>

#include <cmath>
#include <limits>

#include "plirls/instance_gen.hpp"
#include "plirls/kernels.hpp"
#include "plirls/oracles.hpp"
#include "plirls/problem.hpp"
#include "plirls/solver.hpp"

using namespace plirls;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// one scalar term B (1x1) with offset c
AffineTerm scalar_term(double b, double c) {
    Matrix m(1, 1);
    m(0, 0) = b;
    return AffineTerm(std::make_shared<DenseLinearMap>(m), Vector{c});
}

ProblemSpec scalar_problem(double b, double c, double epsilon, double nu) {
    ProblemSpec spec;
    spec.dim = 1;
    spec.epsilon = epsilon;
    spec.nu = nu;
    spec.f = ProxFriendlyTerm::zero();
    spec.s = SmoothTerm::zero();
    spec.terms.push_back(scalar_term(b, c));
    return spec;
}

ProblemSpec random_problem(Rng &rng, std::size_t n, std::size_t m_terms, double epsilon,
                           double nu, bool with_smooth) {
    ProblemSpec spec;
    spec.dim = n;
    spec.epsilon = epsilon;
    spec.nu = nu;
    spec.f = ProxFriendlyTerm::zero();
    if (with_smooth) {
        Matrix a(n + 1, n);
        for (double &v : a.data)
            v = rng.normal();
        Vector b(n + 1);
        for (double &v : b)
            v = rng.normal();
        spec.s = SmoothTerm::quadratic_loss(std::make_shared<DenseLinearMap>(a), b, 0.7);
    } else {
        spec.s = SmoothTerm::zero();
    }
    for (std::size_t i = 0; i < m_terms; ++i) {
        const std::size_t rows = 1 + rng.uniform_index(3);
        Matrix b(rows, n);
        for (double &v : b.data)
            v = rng.normal();
        Vector c(rows);
        for (double &v : c)
            v = rng.normal();
        spec.terms.emplace_back(std::make_shared<DenseLinearMap>(b), c);
    }
    return spec;
}

} // namespace

TEST_CASE("residual norms") {
    SUBCASE("identity map, Pythagorean") {
        ProblemSpec spec;
        spec.dim = 2;
        spec.epsilon = 1.0;
        spec.nu = 1.0;
        spec.f = ProxFriendlyTerm::zero();
        spec.s = SmoothTerm::zero();
        spec.terms.emplace_back(std::make_shared<IdentityMap>(2), Vector{0.0, 0.0});
        Vector r = residual_norms(spec, Vector{3.0, 4.0});
        CHECK(r.size() == 1);
        CHECK(r[0] == doctest::Approx(5.0).epsilon(1e-15));
        CHECK_THROWS_AS(residual_norms(spec, Vector{1.0}), std::invalid_argument);
    }
    SUBCASE("zero residual at a preimage") {
        ProblemSpec spec = scalar_problem(2.0, 6.0, 1.0, 1.0);
        Vector r = residual_norms(spec, Vector{3.0});
        CHECK(r[0] == 0.0);
    }
    SUBCASE("diagonal map, hand value") {
        Matrix m(2, 2);
        m.data = {1, 0, 0, 2};
        ProblemSpec spec;
        spec.dim = 2;
        spec.epsilon = 1.0;
        spec.nu = 1.0;
        spec.f = ProxFriendlyTerm::zero();
        spec.s = SmoothTerm::zero();
        spec.terms.emplace_back(std::make_shared<DenseLinearMap>(m), Vector{1.0, 1.0});
        // Bx - c = (0, 1), norm 1
        Vector r = residual_norms(spec, Vector{1.0, 1.0});
        CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("eval_p") {
    CHECK(eval_p(scalar_problem(1.0, 0.0, 1.0, 1.0), Vector{0.0}, 0) == 1.0);
    // r = 3, eps = 4 -> 5
    CHECK(eval_p(scalar_problem(1.0, 0.0, 4.0, 1.0), Vector{3.0}, 0) ==
          doctest::Approx(5.0).epsilon(1e-15));
    CHECK(eval_p(scalar_problem(1.0, 0.0, 1.0, 1.0), Vector{1.0}, 0) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(eval_p(scalar_problem(1.0, 0.0, 1.0, 1.0), Vector{0.0}, 1),
                    std::out_of_range);
}

TEST_CASE("eval_p lower bound and Lipschitz continuity") {
    Rng rng(21);
    ProblemSpec spec = random_problem(rng, 4, 3, 0.3, 1.0, false);
    for (int t = 0; t < 40; ++t) {
        Vector u(4), v(4);
        for (std::size_t i = 0; i < 4; ++i) {
            u[i] = 3.0 * rng.normal();
            v[i] = 3.0 * rng.normal();
        }
        Vector diff(4);
        for (std::size_t i = 0; i < 4; ++i)
            diff[i] = u[i] - v[i];
        const double dist = kernels::nrm2(diff.data(), 4);
        for (std::size_t i = 0; i < spec.num_terms(); ++i) {
            const double pu = eval_p(spec, u, i), pv = eval_p(spec, v, i);
            CHECK(pu >= spec.epsilon);
            CHECK(std::fabs(pu - pv) <=
                  spec.terms[i].map->operator_norm() * dist * (1 + 1e-10) + 1e-12);
        }
    }
}

TEST_CASE("smoothed objective") {
    SUBCASE("unit instance, nu = 1") {
        CHECK(eval_smoothed_objective(scalar_problem(1.0, 0.0, 1.0, 1.0), Vector{0.0}) ==
              doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("nu = 1/2 at a zero residual") {
        CHECK(eval_smoothed_objective(scalar_problem(1.0, 0.0, 1.0, 0.5), Vector{0.0}) ==
              doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("indicator f propagates +inf") {
        ProblemSpec spec = scalar_problem(1.0, 0.0, 1.0, 1.0);
        spec.dim = 3;
        spec.terms.clear();
        spec.terms.emplace_back(std::make_shared<IdentityMap>(3), Vector{0, 0, 0});
        spec.f = ProxFriendlyTerm::sparsity_constraint(1);
        CHECK(eval_smoothed_objective(spec, Vector{1.0, 2.0, 0.0}) == kInf);
    }
}

TEST_CASE("grad_h hand values and additivity") {
    ProblemSpec spec = scalar_problem(1.0, 0.0, 1.0, 1.0);
    CHECK(grad_h(spec, Vector{0.0})[0] == 0.0);
    CHECK(grad_h(spec, Vector{1.0})[0] ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

    // two identical terms give exactly twice the single-term gradient
    ProblemSpec twice = spec;
    twice.terms.push_back(scalar_term(1.0, 0.0));
    CHECK(grad_h(twice, Vector{1.3})[0] == 2.0 * grad_h(spec, Vector{1.3})[0]);
}

TEST_CASE("grad_h matches central differences") {
    Rng rng(22);
    for (double nu : {1.0, 0.5, 0.25}) {
        for (int t = 0; t < 6; ++t) {
            ProblemSpec spec = random_problem(rng, 5, 3, 0.4, nu, true);
            Vector x(5);
            for (double &v : x)
                v = rng.normal();
            Vector analytic = grad_h(spec, x);
            auto smooth = [&spec](Span p) {
                Vector r = residual_norms(spec, p);
                return spec.s.value(p) + detail::smoothed_term_sum(spec, r);
            };
            Vector fd = oracles::fd_gradient(smooth, x, 1e-5);
            const double err =
                std::sqrt(kernels::nrm2sq_diff(analytic.data(), fd.data(), 5));
            const double scale = std::max(1.0, kernels::nrm2(analytic.data(), 5));
            CHECK(err / scale <= 1e-6);
        }
    }
}

TEST_CASE("auxiliary objective") {
    SUBCASE("hand value at nu = 1") {
        ProblemSpec spec = scalar_problem(1.0, 0.0, 1.0, 1.0);
        // q = 1, y = 0.5: 1*0.5 + 1/(4*0.5) = 1
        CHECK(eval_auxiliary(spec, Vector{0.0}, Vector{0.5}) ==
              doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("outside the weight box") {
        ProblemSpec spec = scalar_problem(1.0, 0.0, 1.0, 1.0);
        CHECK(eval_auxiliary(spec, Vector{0.0}, Vector{0.51}) == kInf);
        CHECK_THROWS_AS(eval_auxiliary(spec, Vector{0.0}, Vector{-0.1}),
                        std::invalid_argument);
        CHECK_THROWS_AS(eval_auxiliary(spec, Vector{0.0}, Vector{0.0}),
                        std::invalid_argument);
    }
    SUBCASE("majorizes the smoothed objective, equality at the weight update") {
        Rng rng(23);
        for (double nu : {1.0, 0.5, 0.25}) {
            for (int t = 0; t < 8; ++t) {
                ProblemSpec spec = random_problem(rng, 4, 3, 0.5, nu, t % 2 == 0);
                Vector x(4);
                for (double &v : x)
                    v = rng.normal();
                const double f_val = eval_smoothed_objective(spec, x);
                const double bound = weight_box_bound(nu, spec.epsilon);
                // arbitrary valid weights majorize
                Vector y(spec.num_terms());
                for (double &v : y)
                    v = bound * (0.05 + 0.95 * rng.uniform());
                CHECK(eval_auxiliary(spec, x, y) >= f_val - 1e-9 * (1 + std::fabs(f_val)));
                // the closed-form update attains equality
                WeightVector yopt = weight_update(spec, x);
                const double psi = eval_auxiliary(spec, x, yopt.w);
                CHECK(std::fabs(psi - f_val) <= 1e-12 * (1.0 + std::fabs(f_val)));
            }
        }
    }
}

TEST_CASE("quadratic smooth term") {
    Matrix a(2, 2);
    a.data = {1, 0, 0, 2};
    SmoothTerm s = SmoothTerm::quadratic_loss(std::make_shared<DenseLinearMap>(a),
                                              Vector{1.0, 0.0}, 3.0);
    // (3/2)||Ax-b||^2 at x=(1,1): residual (0,2), value 6
    CHECK(s.value(Vector{1.0, 1.0}) == doctest::Approx(6.0).epsilon(1e-15));
    Vector g(2);
    s.gradient(Vector{1.0, 1.0}, g);
    CHECK(g[0] == doctest::Approx(0.0));
    CHECK(g[1] == doctest::Approx(12.0)); // 3 * A^T (0,2) = 3*(0,4)
    CHECK(s.lipschitz_modulus == doctest::Approx(12.0)); // 3 * ||A^T A|| = 3*4
}

TEST_CASE("smooth term gradient is Lipschitz with the stated modulus") {
    Rng rng(24);
    Matrix a(6, 4);
    for (double &v : a.data)
        v = rng.normal();
    Vector b(6);
    for (double &v : b)
        v = rng.normal();
    SmoothTerm s =
        SmoothTerm::quadratic_loss(std::make_shared<DenseLinearMap>(a), b, 1.3);
    for (int t = 0; t < 30; ++t) {
        Vector u(4), v(4), gu(4), gv(4);
        for (std::size_t i = 0; i < 4; ++i) {
            u[i] = 2 * rng.normal();
            v[i] = 2 * rng.normal();
        }
        s.gradient(u, gu);
        s.gradient(v, gv);
        const double lhs = std::sqrt(kernels::nrm2sq_diff(gu.data(), gv.data(), 4));
        const double rhs =
            s.lipschitz_modulus * std::sqrt(kernels::nrm2sq_diff(u.data(), v.data(), 4));
        CHECK(lhs <= rhs * (1 + 1e-10));
    }
}

TEST_CASE("problem validation") {
    ProblemSpec spec = scalar_problem(1.0, 0.0, 1.0, 1.0);
    CHECK_NOTHROW(validate_problem(spec));
    spec.epsilon = 0.0;
    CHECK_THROWS_AS(validate_problem(spec), std::invalid_argument);
    spec.epsilon = 1.0;
    spec.nu = 1.5;
    CHECK_THROWS_AS(validate_problem(spec), std::invalid_argument);
}
