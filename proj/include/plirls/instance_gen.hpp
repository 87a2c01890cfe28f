#pragma once

#include <cstdint>
#include <random>

#include "plirls/types.hpp"

namespace plirls {

/// Deterministic generator: mt19937_64 for the bit stream, hand-rolled
/// uniform/normal transforms so the produced doubles do not depend on the
/// standard library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    double uniform() { // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double normal(); // standard normal via Box-Muller

    std::size_t uniform_index(std::size_t n); // [0, n), unbiased

  private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Shared instance shape for the sparse least squares and l0 regression
/// apps: Gaussian A (entries N(0,1)/sqrt(rows)), k-sparse ground truth,
/// b = A x_true + sparse impulse noise on a fraction of the entries.
struct RegressionInstance {
    Matrix a;
    Vector b;
    Vector x_true;
    std::vector<std::size_t> corrupted; // indices of the impulse entries
};

RegressionInstance generate_regression_instance(std::uint64_t seed, std::size_t rows,
                                                std::size_t cols, std::size_t sparsity,
                                                double noise_fraction,
                                                double noise_amplitude = 5.0);

/// Rank-r factor product plus sparse corruption, for the low-rank and
/// multiblock apps.
struct LowRankInstance {
    Matrix d;
    Matrix low_rank_true;
    Matrix sparse_true;
};

LowRankInstance generate_lowrank_instance(std::uint64_t seed, std::size_t side,
                                          std::size_t rank, double corruption_fraction,
                                          double corruption_amplitude = 3.0);

} // namespace plirls
