#include <doctest.h>

#include <cmath>

#include "plirls/instance_gen.hpp"
#include "plirls/kernels.hpp"
#include "plirls/oracles.hpp"
#include "plirls/solver.hpp"

using namespace plirls;

namespace {

AffineTerm scalar_term(double b, double c) {
    Matrix m(1, 1);
    m(0, 0) = b;
    return AffineTerm(std::make_shared<DenseLinearMap>(m), Vector{c});
}

ProblemSpec toy_problem(double b, double c, double epsilon, double nu) {
    ProblemSpec spec;
    spec.dim = 1;
    spec.epsilon = epsilon;
    spec.nu = nu;
    spec.f = ProxFriendlyTerm::zero();
    spec.s = SmoothTerm::zero();
    spec.terms.push_back(scalar_term(b, c));
    return spec;
}

// random row-term instance: f = 0 or l0, one 1 x n term per row of A
ProblemSpec random_row_instance(Rng &rng, std::size_t rows, std::size_t cols,
                                double epsilon, double nu, double l0_lambda) {
    auto a = std::make_shared<Matrix>(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (double &v : a->data)
        v = scale * rng.normal();
    ProblemSpec spec;
    spec.dim = cols;
    spec.epsilon = epsilon;
    spec.nu = nu;
    spec.f = l0_lambda > 0 ? ProxFriendlyTerm::l0(l0_lambda) : ProxFriendlyTerm::zero();
    spec.s = SmoothTerm::zero();
    for (std::size_t i = 0; i < rows; ++i)
        spec.terms.emplace_back(std::make_shared<MatrixRowMap>(a, i),
                                Vector{rng.normal()});
    return spec;
}

} // namespace

TEST_CASE("local Lipschitz bound formula") {
    const AffineTerm unit = scalar_term(1.0, 0.0);
    CHECK(local_lipschitz_bound(unit, 1.0, 1.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(local_lipschitz_bound(unit, 0.5, 1.0) == doctest::Approx(10.0).epsilon(1e-15));

    const AffineTerm zero = scalar_term(0.0, 0.0);
    CHECK(local_lipschitz_bound(zero, 1.0, 1.0) == 0.0);

    // monotone nondecreasing in tau
    const AffineTerm t2 = scalar_term(2.0, 1.0);
    double prev = 0.0;
    for (double tau : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double v = local_lipschitz_bound(t2, 0.7, tau);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("step modulus") {
    CHECK(step_modulus(1.0, Vector{3.0}, WeightVector{{0.5}}) ==
          doctest::Approx(2.5).epsilon(1e-15));
    CHECK(step_modulus(1.0, Vector{3.0}, WeightVector{{1e-300}}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(step_modulus(0.0, Vector{1.0, 1.0}, WeightVector{{0.2, 0.4}}) ==
          doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("weight update formula") {
    // nu = 1, r = 0, eps = 0.1 -> 5
    CHECK(weight_update(toy_problem(1.0, 0.0, 0.1, 1.0), Vector{0.0}).w[0] ==
          doctest::Approx(5.0).epsilon(1e-15));
    // nu = 1, r = 1, eps = 1 -> 1/(2 sqrt 2)
    CHECK(weight_update(toy_problem(1.0, 0.0, 1.0, 1.0), Vector{1.0}).w[0] ==
          doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-15));
    // nu = 1/2, r = 0, eps = 1 -> 1/4
    CHECK(weight_update(toy_problem(1.0, 0.0, 1.0, 0.5), Vector{0.0}).w[0] ==
          doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("weights stay in the box on random instances") {
    Rng rng(41);
    for (double nu : {1.0, 0.5, 0.25}) {
        ProblemSpec spec = random_row_instance(rng, 6, 4, 0.3, nu, 0.0);
        const double bound = weight_box_bound(nu, spec.epsilon);
        for (int t = 0; t < 30; ++t) {
            Vector x(4);
            for (double &v : x)
                v = 4.0 * rng.normal();
            WeightVector y = weight_update(spec, x);
            for (double v : y.w) {
                CHECK(v > 0.0);
                CHECK(v <= bound);
            }
        }
    }
}

TEST_CASE("grad_H_x") {
    ProblemSpec spec = toy_problem(1.0, 0.0, 1.0, 1.0);
    // y = 0 leaves only grad s (zero here)
    CHECK(grad_H_x(spec, Vector{1.0}, WeightVector{{0.0}})[0] == 0.0);
    // 2 * 0.5 * 1 * 1 = 1
    CHECK(grad_H_x(spec, Vector{1.0}, WeightVector{{0.5}})[0] == 1.0);
}

TEST_CASE("grad_H_x at the weight update equals grad_h") {
    Rng rng(42);
    for (double nu : {1.0, 0.5}) {
        ProblemSpec spec = random_row_instance(rng, 5, 3, 0.6, nu, 0.0);
        for (int t = 0; t < 20; ++t) {
            Vector x(3);
            for (double &v : x)
                v = 2.0 * rng.normal();
            WeightVector y = weight_update(spec, x);
            Vector lhs = grad_H_x(spec, x, y);
            Vector rhs = grad_h(spec, x);
            const double err =
                std::sqrt(kernels::nrm2sq_diff(lhs.data(), rhs.data(), 3));
            CHECK(err <= 1e-12 * (1.0 + kernels::nrm2(rhs.data(), 3)));
        }
    }
}

TEST_CASE("plirls_step at a critical point is a fixed point") {
    // f = 0, s = 0, single term B=1, c=0: x = 0 is the smoothed minimizer
    ProblemSpec spec = toy_problem(1.0, 0.0, 1.0, 1.0);
    SolveResult res = run_plirls(spec, Vector{0.0});
    CHECK(res.status == SolveStatus::Converged);
    CHECK(res.trace.size() == 1);
    CHECK(res.trace[0].step_norm == 0.0);
    CHECK(res.trace[0].w_norm == 0.0);
}

TEST_CASE("degenerate instance reduces to gradient descent") {
    // f = 0, m = 0, s = x^2/2: the step is x - (1/c_k) x with c_k = gamma L_s
    ProblemSpec spec;
    spec.dim = 1;
    spec.epsilon = 1.0;
    spec.nu = 1.0;
    spec.f = ProxFriendlyTerm::zero();
    Matrix a(1, 1);
    a(0, 0) = 1.0;
    spec.s = SmoothTerm::quadratic_loss(std::make_shared<DenseLinearMap>(a),
                                        Vector{0.0}, 1.0);

    SolverState state = make_initial_state(spec, Vector{2.0});
    StepRule rule;
    rule.gamma = 1.1;
    rule.tau = 20.0;
    auto rec = plirls_step(spec, state, rule);
    REQUIRE(rec.has_value());
    CHECK(rec->c_k == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(state.x[0] == doctest::Approx(2.0 * (1.0 - 1.0 / 1.1)).epsilon(1e-15));
}

TEST_CASE("l0 regression toy stays monotone and reaches a critical point") {
    // n = 1, A = 1, b = 2, lambda = 10, eps = 0.1, x0 = 2
    ProblemSpec spec;
    spec.dim = 1;
    spec.epsilon = 0.1;
    spec.nu = 1.0;
    spec.f = ProxFriendlyTerm::l0(10.0);
    spec.s = SmoothTerm::zero();
    spec.terms.push_back(scalar_term(1.0, 2.0));

    SolveOptions opts;
    opts.max_iters = 5000;
    opts.w_tol = 1e-8;
    opts.step_tol = 1e-10;
    SolveResult res = run_plirls(spec, Vector{2.0}, opts);
    for (std::size_t i = 1; i < res.trace.size(); ++i)
        CHECK(res.trace[i].objective <= res.trace[i - 1].objective + 1e-9);
    CHECK(res.trace.back().w_norm < 1e-6);

    // grid oracle for the global structure of F_eps on [-3, 3]
    oracles::GridSpec box{{-3.0}, {3.0}, 1e-4};
    auto grid = oracles::grid_minimize_F(spec, box);
    CHECK(grid.x[0] == doctest::Approx(0.0).epsilon(1e-3)); // global min at 0
    // x0 = 2 sits in the basin of the local critical point at 2
    CHECK(res.x[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(eval_smoothed_objective(spec, res.x) >= grid.value);
}

TEST_CASE("run_plirls rejects invalid options") {
    ProblemSpec spec = toy_problem(1.0, 0.0, 1.0, 1.0);
    SolveOptions opts;
    opts.gamma = 1.0;
    CHECK_THROWS_AS(run_plirls(spec, Vector{0.0}, opts), std::invalid_argument);
    opts.gamma = 1.1;
    opts.max_iters = 0;
    CHECK_THROWS_AS(run_plirls(spec, Vector{0.0}, opts), std::invalid_argument);
}

TEST_CASE("divergent instance trips the trust-radius cap") {
    // concave smooth term pushes iterates outward forever
    ProblemSpec spec;
    spec.dim = 1;
    spec.epsilon = 1.0;
    spec.nu = 1.0;
    spec.f = ProxFriendlyTerm::zero();
    spec.s.value = [](Span x) { return -x[0] * x[0]; };
    spec.s.gradient = [](Span x, MutSpan g) { g[0] = -2.0 * x[0]; };
    spec.s.lipschitz_modulus = 2.0;

    SolveOptions opts;
    opts.max_iters = 100000;
    SolveResult res = run_plirls(spec, Vector{1.0}, opts);
    CHECK(res.status == SolveStatus::Diverged);
}

TEST_CASE("decrease and subgradient witnesses on random instances") {
    Rng rng(43);
    for (int t = 0; t < 6; ++t) {
        ProblemSpec spec = random_row_instance(rng, 12, 5, 0.7, 1.0, t % 2 ? 0.2 : 0.0);
        SolveOptions opts;
        opts.max_iters = 150;
        Vector x0(5);
        for (double &v : x0)
            v = rng.normal();
        double prev_obj = eval_smoothed_objective(spec, x0);
        opts.on_iteration = [&](const SolverState &st, const StepRule &,
                                const IterationRecord &rec) {
            CHECK(rec.rho1_witness >= -1e-9);
            CHECK(rec.rho2_witness >= -1e-9);
            CHECK(rec.objective <= prev_obj + 1e-9);
            prev_obj = rec.objective;
            // auxiliary consistency after every iteration
            const double psi = eval_auxiliary(spec, st.x, st.y.w);
            CHECK(std::fabs(psi - rec.objective) <=
                  1e-12 * (1.0 + std::fabs(rec.objective)));
        };
        run_plirls(spec, x0, opts);
    }
}

TEST_CASE("monotone decrease holds for nu < 1") {
    Rng rng(44);
    for (double nu : {0.5, 0.25}) {
        ProblemSpec spec = random_row_instance(rng, 10, 4, 0.8, nu, 0.0);
        SolveOptions opts;
        opts.max_iters = 120;
        SolveResult res = run_plirls(spec, Vector(4, 0.5));
        for (std::size_t i = 1; i < res.trace.size(); ++i)
            CHECK(res.trace[i].objective <= res.trace[i - 1].objective + 1e-9);
    }
}

TEST_CASE("trust radius tracks the iterates") {
    // start far out so tau0 = 10 ||x0|| covers the path; the rule keeps
    // tau >= ||x^k|| throughout
    Rng rng(45);
    ProblemSpec spec = random_row_instance(rng, 8, 3, 0.6, 1.0, 0.0);
    SolveOptions opts;
    opts.max_iters = 100;
    opts.on_iteration = [&](const SolverState &st, const StepRule &rule,
                            const IterationRecord &) {
        CHECK(rule.tau >= kernels::nrm2(st.x.data(), st.x.size()) - 1e-12);
    };
    run_plirls(spec, Vector{3.0, -1.0, 2.0}, opts);
}
