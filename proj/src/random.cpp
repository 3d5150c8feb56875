#include "benchpricer/random.hpp"

#include <cmath>

#include "benchpricer/errors.hpp"
#include "benchpricer/specfun.hpp"

namespace benchpricer {

using detail::require;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed) : engine_(splitmix64(seed)) {}

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

double RandomSource::uniform() {
    // 53 random bits, shifted off zero.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomSource::normal() { return normal_(engine_); }

double RandomSource::gamma(double shape) {
    require(shape > 0.0, "RandomSource::gamma: shape must be positive");
    return gamma_(engine_, std::gamma_distribution<double>::param_type(shape, 1.0));
}

std::uint64_t RandomSource::poisson(double mean) {
    require(mean >= 0.0 && std::isfinite(mean), "RandomSource::poisson: mean must be finite and nonnegative");
    if (mean == 0.0) return 0;
    return poisson_(engine_, std::poisson_distribution<std::uint64_t>::param_type(mean));
}

double RandomSource::chi2(double dof) { return 2.0 * gamma(0.5 * dof); }

double RandomSource::nchi2(double dof, double lambda) {
    require(dof > 0.0 && lambda >= 0.0, "RandomSource::nchi2: need dof > 0 and lambda >= 0");
    const double extra = lambda > 0.0 ? 2.0 * static_cast<double>(poisson(0.5 * lambda)) : 0.0;
    return chi2(dof + extra);
}

std::pair<double, double> RandomSource::nchi2_antithetic(double dof, double lambda) {
    require(dof > 0.0 && lambda >= 0.0, "RandomSource::nchi2_antithetic: need dof > 0 and lambda >= 0");
    const double u = uniform();
    return {specfun::nchi2_quantile(u, dof, lambda), specfun::nchi2_quantile(1.0 - u, dof, lambda)};
}

}  // namespace benchpricer
