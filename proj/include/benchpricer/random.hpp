#pragma once

// Seedable random source. Every stochastic routine takes one by reference;
// one instance per thread. Sub-streams give batch-level reproducibility that
// does not depend on how batches are scheduled.

#include <cstdint>
#include <random>
#include <utility>

namespace benchpricer {

class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed);
    /// Independent stream `stream` derived from `seed` by splitmix64 mixing.
    RandomSource(std::uint64_t seed, std::uint64_t stream);

    double uniform();  // open interval (0, 1)
    double normal();
    double gamma(double shape);  // unit scale
    std::uint64_t poisson(double mean);
    double chi2(double dof);

    /// Noncentral chi-squared by Poisson mixing: J ~ Poisson(lambda/2), then
    /// a central chi-squared with dof + 2J degrees of freedom.
    double nchi2(double dof, double lambda);

    /// Antithetic pair by inversion at U and 1 - U. Both coordinates have the
    /// noncentral law and move in opposite directions, so any monotone
    /// function of the draw has negatively correlated pair values.
    std::pair<double, double> nchi2_antithetic(double dof, double lambda);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
    std::gamma_distribution<double> gamma_;
    std::poisson_distribution<std::uint64_t> poisson_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace benchpricer
