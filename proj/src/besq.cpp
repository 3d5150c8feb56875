#include "benchpricer/besq.hpp"

#include <cmath>

#include "benchpricer/errors.hpp"
#include "benchpricer/specfun.hpp"

namespace benchpricer::besq {
namespace {

using detail::require;

void check_common(double T, double x0, double delta) {
    require(T > 0.0, "besq: horizon must be positive");
    require(x0 > 0.0, "besq: start value must be positive");
    require(delta != 2.0, "besq: dimension 2 is not supported");
}

}  // namespace

void BesqSpec::validate() const {
    require(x0 >= 0.0, "BesqSpec: start value must be nonnegative");
    require(delta != 2.0, "BesqSpec: dimension 2 is not supported");
    switch (boundary) {
        case Boundary::None:
            require(delta > 2.0, "BesqSpec: no boundary condition requires delta > 2");
            break;
        case Boundary::Reflecting:
            require(delta > 0.0 && delta < 2.0, "BesqSpec: reflecting boundary requires 0 < delta < 2");
            break;
        case Boundary::Absorbing:
            require(delta < 2.0, "BesqSpec: absorbing boundary requires delta < 2");
            break;
    }
}

void CirParams::validate() const {
    require(kappa > 0.0 && theta > 0.0 && sigma > 0.0, "CirParams: kappa, theta, sigma must be positive");
    require(s0 >= 0.0, "CirParams: start value must be nonnegative");
}

double density_norm_decreasing(double xT, double T, double x0, double delta) {
    check_common(T, x0, delta);
    require(delta < 2.0, "density_norm_decreasing: requires delta < 2");
    require(xT > 0.0, "density_norm_decreasing: xT must be positive");
    // e^{-(xT + x0)/(2T)} I(z) = e^{-(sqrt(xT) - sqrt(x0))^2 / (2T)} e^{-z} I(z), z = sqrt(xT x0)/T.
    const double z = std::sqrt(xT * x0) / T;
    const double gap = std::sqrt(xT) - std::sqrt(x0);
    const double power = 0.5 * (0.5 * delta - 1.0);
    return 0.5 / T * std::pow(xT / x0, power) * std::exp(-gap * gap / (2.0 * T)) *
           specfun::bessel_i_scaled(1.0 - 0.5 * delta, z);
}

double density_reflecting(double xT, double T, double x0, double delta) {
    check_common(T, x0, delta);
    require(delta > 0.0, "density_reflecting: requires delta > 0");
    require(xT > 0.0, "density_reflecting: xT must be positive");
    return specfun::nchi2_pdf(xT / T, delta, x0 / T) / T;
}

double cdf_reflecting(double xT, double T, double x0, double delta) {
    check_common(T, x0, delta);
    require(delta > 0.0, "cdf_reflecting: requires delta > 0");
    require(xT >= 0.0, "cdf_reflecting: xT must be nonnegative");
    return specfun::nchi2_cdf(xT / T, delta, x0 / T);
}

double cdf_absorbing(double xT, double T, double x0, double delta) {
    check_common(T, x0, delta);
    require(delta < 2.0, "cdf_absorbing: requires delta < 2");
    require(xT >= 0.0, "cdf_absorbing: xT must be nonnegative");
    if (std::isinf(xT)) return 1.0;
    return specfun::nchi2_ccdf(x0 / T, 2.0 - delta, xT / T);
}

double absorption_probability(double T, double x0, double delta) { return cdf_absorbing(0.0, T, x0, delta); }

double tail_integral_schroder(double lower, double T, double x0, double delta) {
    check_common(T, x0, delta);
    require(delta < 2.0, "tail_integral_schroder: requires delta < 2");
    require(lower >= 0.0, "tail_integral_schroder: lower limit must be nonnegative");
    if (std::isinf(lower)) return 0.0;
    return specfun::nchi2_cdf(x0 / T, 2.0 - delta, lower / T);
}

double transition_cdf(const BesqSpec& spec, double xT, double T) {
    spec.validate();
    if (spec.boundary == Boundary::Absorbing) return cdf_absorbing(xT, T, spec.x0, spec.delta);
    return cdf_reflecting(xT, T, spec.x0, spec.delta);
}

TimeChange cir_time_change(const CirParams& p, double t) {
    p.validate();
    require(t >= 0.0, "cir_time_change: time must be nonnegative");
    return {p.sigma * p.sigma * std::expm1(p.kappa * t) / (4.0 * p.kappa), std::exp(-p.kappa * t),
            4.0 * p.kappa * p.theta / (p.sigma * p.sigma)};
}

double power_local_martingale_expectation(double x0, double T, double delta) {
    check_common(T, x0, delta);
    require(delta > 2.0, "power_local_martingale_expectation: requires delta > 2");
    return std::pow(x0, 1.0 - 0.5 * delta) * specfun::nchi2_cdf(x0 / T, delta - 2.0, 0.0);
}

}  // namespace benchpricer::besq
