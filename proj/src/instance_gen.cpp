#include "plirls/instance_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace plirls {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

std::size_t Rng::uniform_index(std::size_t n) {
    require(n > 0, "uniform_index: empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = eng_();
    while (v >= limit)
        v = eng_();
    return static_cast<std::size_t>(v % n);
}

namespace {

std::vector<std::size_t> sample_without_replacement(Rng &rng, std::size_t population,
                                                    std::size_t count) {
    std::vector<std::size_t> idx(population);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < count; ++i)
        std::swap(idx[i], idx[i + rng.uniform_index(population - i)]);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace

RegressionInstance generate_regression_instance(std::uint64_t seed, std::size_t rows,
                                                std::size_t cols, std::size_t sparsity,
                                                double noise_fraction,
                                                double noise_amplitude) {
    require(rows > 0 && cols > 0, "generate_regression_instance: empty shape");
    require(sparsity <= cols, "generate_regression_instance: sparsity > cols");
    require(noise_fraction >= 0.0 && noise_fraction <= 1.0,
            "generate_regression_instance: noise_fraction outside [0, 1]");
    require(noise_amplitude > 0.0,
            "generate_regression_instance: noise_amplitude must be > 0");

    Rng rng(seed);
    RegressionInstance inst;
    inst.a = Matrix(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (double &v : inst.a.data)
        v = rng.normal() * scale;

    inst.x_true.assign(cols, 0.0);
    for (std::size_t idx : sample_without_replacement(rng, cols, sparsity))
        inst.x_true[idx] = rng.normal();

    inst.b.assign(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j)
            acc += inst.a(i, j) * inst.x_true[j];
        inst.b[i] = acc;
    }

    const auto corrupt =
        static_cast<std::size_t>(std::llround(noise_fraction * static_cast<double>(rows)));
    inst.corrupted = sample_without_replacement(rng, rows, corrupt);
    for (std::size_t idx : inst.corrupted) {
        // impulse bounded away from zero so the corruption count is exact
        const double impulse = noise_amplitude * (1.0 + std::fabs(rng.normal()));
        inst.b[idx] += rng.uniform() < 0.5 ? impulse : -impulse;
    }
    return inst;
}

LowRankInstance generate_lowrank_instance(std::uint64_t seed, std::size_t side,
                                          std::size_t rank, double corruption_fraction,
                                          double corruption_amplitude) {
    require(side > 0, "generate_lowrank_instance: empty shape");
    require(rank > 0 && rank <= side, "generate_lowrank_instance: bad rank");
    require(corruption_fraction >= 0.0 && corruption_fraction <= 1.0,
            "generate_lowrank_instance: corruption_fraction outside [0, 1]");
    require(corruption_amplitude > 0.0,
            "generate_lowrank_instance: corruption_amplitude must be > 0");

    Rng rng(seed);
    Matrix u(side, rank), v(side, rank);
    for (double &x : u.data)
        x = rng.normal();
    for (double &x : v.data)
        x = rng.normal();

    LowRankInstance inst;
    inst.low_rank_true = Matrix(side, side);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < rank; ++r)
                acc += u(i, r) * v(j, r);
            inst.low_rank_true(i, j) = acc * scale;
        }

    inst.sparse_true = Matrix(side, side);
    const auto corrupt = static_cast<std::size_t>(
        std::llround(corruption_fraction * static_cast<double>(side * side)));
    for (std::size_t idx : sample_without_replacement(rng, side * side, corrupt)) {
        const double impulse = corruption_amplitude * (1.0 + std::fabs(rng.normal()));
        inst.sparse_true.data[idx] = rng.uniform() < 0.5 ? impulse : -impulse;
    }

    inst.d = Matrix(side, side);
    for (std::size_t i = 0; i < inst.d.size(); ++i)
        inst.d.data[i] = inst.low_rank_true.data[i] + inst.sparse_true.data[i];
    return inst;
}

} // namespace plirls
