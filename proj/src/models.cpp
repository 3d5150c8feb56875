#include "benchpricer/models.hpp"

#include <cmath>

#include "benchpricer/errors.hpp"

namespace benchpricer {

using detail::require;

void TcevParams::validate() const {
    require(c > 0.0, "TcevParams: c must be positive");
    require(a < 1.0, "TcevParams: a must be below 1");
    require(alpha0 > 0.0, "TcevParams: alpha0 must be positive");
    require(eta > 0.0, "TcevParams: eta must be positive");
    require(x0 > 0.0, "TcevParams: x0 must be positive");
    require(std::isfinite(c + a + alpha0 + eta + x0), "TcevParams: parameters must be finite");
}

void Rate32Params::validate() const {
    require(kappa > 0.0 && theta > 0.0 && sigma > 0.0 && r0 > 0.0, "Rate32Params: all parameters must be positive");
    require(std::isfinite(kappa + theta + sigma + r0), "Rate32Params: parameters must be finite");
}

double SavingsAccount::beta(double t) const { return std::exp(r * t); }

double SavingsAccount::discount(double t, double T) const { return std::exp(-r * (T - t)); }

double tcev_alpha(const TcevParams& p, double t) { return p.alpha0 * std::exp(p.eta * t); }

double tcev_mpor(const TcevParams& p, double x, double t) {
    require(x > 0.0, "tcev_mpor: x must be positive");
    return p.c * std::pow(x / tcev_alpha(p, t), p.a - 1.0);
}

double tcev_drift(const TcevParams& p, double x, double t) {
    require(x > 0.0, "tcev_drift: x must be positive");
    return p.c * p.c * std::pow(tcev_alpha(p, t), 2.0 * (1.0 - p.a)) * std::pow(x, 2.0 * p.a - 1.0);
}

double tcev_diffusion(const TcevParams& p, double x, double t) {
    require(x > 0.0, "tcev_diffusion: x must be positive");
    return p.c * std::pow(tcev_alpha(p, t), 1.0 - p.a) * std::pow(x, p.a);
}

double tcev_phi(const TcevParams& p, double t) {
    require(t >= 0.0, "tcev_phi: time must be nonnegative");
    const double one_minus_a = 1.0 - p.a;
    return one_minus_a * std::pow(p.alpha0, 2.0 * one_minus_a) * p.c * p.c / (2.0 * p.eta) *
           std::expm1(2.0 * one_minus_a * p.eta * t);
}

double tcev_dimension(const TcevParams& p) {
    require(p.a < 1.0, "tcev_dimension: a must be below 1");
    return (3.0 - 2.0 * p.a) / (1.0 - p.a);
}

double tcev_rn_dimension(const TcevParams& p) {
    require(p.a < 1.0, "tcev_rn_dimension: a must be below 1");
    return (1.0 - 2.0 * p.a) / (1.0 - p.a);
}

double tcev_to_besq(const TcevParams& p, double x) { return std::pow(x, 2.0 * (1.0 - p.a)); }

double tcev_from_besq(const TcevParams& p, double y) { return std::pow(y, 0.5 / (1.0 - p.a)); }

double tcev_exact_sample(const TcevParams& p, double x_t, double t, double T, RandomSource& rng) {
    require(x_t > 0.0, "tcev_exact_sample: x_t must be positive");
    require(T > t && t >= 0.0, "tcev_exact_sample: need 0 <= t < T");
    const double dphi = tcev_phi(p, T) - tcev_phi(p, t);
    if (dphi <= 0.0) return x_t;
    const double y = tcev_to_besq(p, x_t);
    return tcev_from_besq(p, dphi * rng.nchi2(tcev_dimension(p), y / dphi));
}

double rate32_drift(const Rate32Params& p, double r) {
    require(r > 0.0, "rate32_drift: r must be positive");
    return p.kappa * (p.theta * r - r * r);
}

double rate32_diffusion(const Rate32Params& p, double r) {
    require(r > 0.0, "rate32_diffusion: r must be positive");
    return p.sigma * r * std::sqrt(r);
}

}  // namespace benchpricer
