#include "plirls/problem.hpp"

#include <cmath>
#include <limits>

#include "plirls/kernels.hpp"
#include "plirls/prox.hpp"

namespace plirls {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

SmoothTerm SmoothTerm::zero() {
    SmoothTerm t;
    t.value = [](Span) { return 0.0; };
    t.gradient = [](Span, MutSpan g) { std::fill(g.begin(), g.end(), 0.0); };
    t.lipschitz_modulus = 0.0;
    return t;
}

SmoothTerm SmoothTerm::quadratic_loss(LinearMapPtr a, Vector b, double scale) {
    require(a != nullptr, "quadratic_loss: null map");
    require(b.size() == a->rows(), "quadratic_loss: b length != map rows");
    require(scale > 0.0, "quadratic_loss: scale must be > 0");
    SmoothTerm t;
    auto bvec = std::make_shared<Vector>(std::move(b));
    t.value = [a, bvec, scale](Span x) {
        Vector r = a->apply(x);
        kernels::axpy(-1.0, bvec->data(), r.data(), r.size());
        return 0.5 * scale * kernels::nrm2sq(r.data(), r.size());
    };
    t.gradient = [a, bvec, scale](Span x, MutSpan g) {
        Vector r = a->apply(x);
        kernels::axpy(-1.0, bvec->data(), r.data(), r.size());
        for (double &v : r)
            v *= scale;
        a->adjoint_apply(r, g);
    };
    t.lipschitz_modulus = scale * a->gram_norm();
    return t;
}

ProxFriendlyTerm ProxFriendlyTerm::zero() {
    ProxFriendlyTerm t;
    t.name = "zero";
    t.value = [](Span) { return 0.0; };
    t.prox = [](Span y, double, MutSpan out) {
        std::copy(y.begin(), y.end(), out.begin());
        return false;
    };
    return t;
}

ProxFriendlyTerm ProxFriendlyTerm::l1(double lambda) {
    require(lambda >= 0.0, "l1 term: lambda must be >= 0");
    ProxFriendlyTerm t;
    t.name = "l1";
    t.value = [lambda](Span x) {
        double s = 0.0;
        for (double v : x)
            s += std::fabs(v);
        return lambda * s;
    };
    t.prox = [lambda](Span y, double c, MutSpan out) {
        kernels::soft_threshold(y.data(), lambda / c, out.data(), y.size());
        return false;
    };
    return t;
}

ProxFriendlyTerm ProxFriendlyTerm::l0(double lambda) {
    require(lambda > 0.0, "l0 term: lambda must be > 0");
    ProxFriendlyTerm t;
    t.name = "l0";
    t.value = [lambda](Span x) {
        std::size_t nz = 0;
        for (double v : x)
            nz += v != 0.0;
        return lambda * static_cast<double>(nz);
    };
    t.prox = [lambda](Span y, double c, MutSpan out) {
        ProxResult r = hard_threshold_l0(y, lambda, c);
        std::copy(r.point.begin(), r.point.end(), out.begin());
        return r.tie_broken;
    };
    return t;
}

ProxFriendlyTerm ProxFriendlyTerm::sparsity_constraint(std::size_t k) {
    ProxFriendlyTerm t;
    t.name = "sparsity";
    t.value = [k](Span x) {
        std::size_t nz = 0;
        for (double v : x)
            nz += v != 0.0;
        return nz <= k ? 0.0 : kInf;
    };
    t.prox = [k](Span y, double, MutSpan out) {
        ProxResult r = project_sparsity(y, k);
        std::copy(r.point.begin(), r.point.end(), out.begin());
        return r.tie_broken;
    };
    return t;
}

ProxFriendlyTerm ProxFriendlyTerm::l1_ball_constraint(double radius) {
    require(radius > 0.0, "l1_ball term: radius must be > 0");
    ProxFriendlyTerm t;
    t.name = "l1-ball";
    t.value = [radius](Span x) {
        double s = 0.0;
        for (double v : x)
            s += std::fabs(v);
        // small slack so feasibility of projected points survives rounding
        return s <= radius * (1.0 + 1e-12) ? 0.0 : kInf;
    };
    t.prox = [radius](Span y, double, MutSpan out) {
        Vector r = project_l1_ball(y, radius);
        std::copy(r.begin(), r.end(), out.begin());
        return false;
    };
    return t;
}

ProxFriendlyTerm ProxFriendlyTerm::box_constraint(Vector lower, Vector upper) {
    require(lower.size() == upper.size(), "box term: bound dimensions differ");
    for (std::size_t i = 0; i < lower.size(); ++i)
        require(lower[i] <= upper[i], "box term: inverted bounds");
    ProxFriendlyTerm t;
    t.name = "box";
    auto lo = std::make_shared<Vector>(std::move(lower));
    auto hi = std::make_shared<Vector>(std::move(upper));
    t.value = [lo, hi](Span x) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < (*lo)[i] || x[i] > (*hi)[i])
                return kInf;
        return 0.0;
    };
    t.prox = [lo, hi](Span y, double, MutSpan out) {
        kernels::clamp(y.data(), lo->data(), hi->data(), out.data(), y.size());
        return false;
    };
    return t;
}

void validate_problem(const ProblemSpec &spec) {
    require(spec.dim > 0, "ProblemSpec: dimension must be positive");
    require(spec.epsilon > 0.0, "ProblemSpec: epsilon must be > 0");
    require(spec.nu > 0.0 && spec.nu <= 1.0, "ProblemSpec: nu must lie in (0, 1]");
    require(static_cast<bool>(spec.f.value) && static_cast<bool>(spec.f.prox),
            "ProblemSpec: f term incomplete");
    require(static_cast<bool>(spec.s.value) && static_cast<bool>(spec.s.gradient),
            "ProblemSpec: s term incomplete");
    require(spec.s.lipschitz_modulus >= 0.0, "ProblemSpec: L_s must be >= 0");
    for (const AffineTerm &term : spec.terms)
        require(term.map->cols() == spec.dim, "ProblemSpec: term dimension mismatch");
}

Vector residual_norms(const ProblemSpec &spec, Span x) {
    require(x.size() == spec.dim, "residual_norms: x has wrong length");
    Vector out(spec.num_terms());
    Vector buf;
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        const AffineTerm &term = spec.terms[i];
        buf.resize(term.map->rows());
        term.map->apply(x, buf);
        out[i] = std::sqrt(
            kernels::nrm2sq_diff(buf.data(), term.offset.data(), buf.size()));
    }
    return out;
}

double eval_p(const ProblemSpec &spec, Span x, std::size_t i) {
    if (i >= spec.num_terms())
        throw std::out_of_range("eval_p: term index out of range");
    const AffineTerm &term = spec.terms[i];
    Vector buf(term.map->rows());
    term.map->apply(x, buf);
    const double rsq = kernels::nrm2sq_diff(buf.data(), term.offset.data(), buf.size());
    return std::sqrt(rsq + spec.epsilon * spec.epsilon);
}

namespace detail {

double smoothed_term_sum(const ProblemSpec &spec, Span resid) {
    const double eps2 = spec.epsilon * spec.epsilon;
    double sum = 0.0;
    if (spec.nu == 1.0) {
        for (double r : resid)
            sum += std::sqrt(r * r + eps2);
    } else {
        const double e = 0.5 * spec.nu;
        for (double r : resid)
            sum += std::pow(r * r + eps2, e);
    }
    return sum;
}

void accumulate_term_gradient(const ProblemSpec &spec, Span x, Span scales,
                              MutSpan grad_out) {
    Vector resid_vec, back(spec.dim);
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        if (scales[i] == 0.0)
            continue;
        const AffineTerm &term = spec.terms[i];
        resid_vec.resize(term.map->rows());
        term.map->apply(x, resid_vec);
        kernels::axpy(-1.0, term.offset.data(), resid_vec.data(), resid_vec.size());
        term.map->adjoint_apply(resid_vec, back);
        kernels::axpy(scales[i], back.data(), grad_out.data(), grad_out.size());
    }
}

} // namespace detail

double eval_smoothed_objective(const ProblemSpec &spec, Span x) {
    require(x.size() == spec.dim, "eval_smoothed_objective: x has wrong length");
    const double fval = spec.f.value(x);
    if (fval == kInf)
        return kInf;
    Vector resid = residual_norms(spec, x);
    return fval + spec.s.value(x) + detail::smoothed_term_sum(spec, resid);
}

Vector grad_h(const ProblemSpec &spec, Span x) {
    require(x.size() == spec.dim, "grad_h: x has wrong length");
    Vector grad(spec.dim);
    spec.s.gradient(x, grad);
    Vector resid = residual_norms(spec, x);
    const double eps2 = spec.epsilon * spec.epsilon;
    Vector scales(resid.size());
    if (spec.nu == 1.0) {
        for (std::size_t i = 0; i < resid.size(); ++i)
            scales[i] = 1.0 / std::sqrt(resid[i] * resid[i] + eps2);
    } else {
        const double e = 0.5 * (spec.nu - 2.0);
        for (std::size_t i = 0; i < resid.size(); ++i)
            scales[i] = spec.nu * std::pow(resid[i] * resid[i] + eps2, e);
    }
    detail::accumulate_term_gradient(spec, x, scales, grad);
    return grad;
}

double aux_theta(double nu) { return nu / (2.0 - nu); }

double aux_kappa(double nu) {
    return 0.5 * (2.0 - nu) * std::pow(0.5 * nu, aux_theta(nu));
}

double weight_box_bound(double nu, double epsilon) {
    const double eps2 = epsilon * epsilon;
    if (nu == 1.0)
        return 0.5 / std::sqrt(eps2);
    return 0.5 * nu * std::pow(eps2, 0.5 * (nu - 2.0));
}

double eval_auxiliary(const ProblemSpec &spec, Span x, Span y) {
    require(x.size() == spec.dim, "eval_auxiliary: x has wrong length");
    require(y.size() == spec.num_terms(), "eval_auxiliary: y has wrong length");
    for (double v : y)
        require(v > 0.0, "eval_auxiliary: weights must be strictly positive");

    const double bound = weight_box_bound(spec.nu, spec.epsilon);
    for (double v : y)
        if (v > bound)
            return kInf;

    const double fval = spec.f.value(x);
    if (fval == kInf)
        return kInf;

    Vector resid = residual_norms(spec, x);
    const double eps2 = spec.epsilon * spec.epsilon;
    double sum = 0.0;
    if (spec.nu == 1.0) {
        for (std::size_t i = 0; i < resid.size(); ++i)
            sum += (resid[i] * resid[i] + eps2) * y[i] + 0.25 / y[i];
    } else {
        const double kappa = aux_kappa(spec.nu);
        const double theta = aux_theta(spec.nu);
        for (std::size_t i = 0; i < resid.size(); ++i)
            sum += (resid[i] * resid[i] + eps2) * y[i] + kappa / std::pow(y[i], theta);
    }
    return fval + spec.s.value(x) + sum;
}

} // namespace plirls
