#include "benchpricer/analytic.hpp"

#include <cmath>
#include <limits>

#include "benchpricer/besq.hpp"
#include "benchpricer/errors.hpp"
#include "benchpricer/specfun.hpp"

namespace benchpricer {
namespace {

using detail::require;

// Quantities shared by every TCEV formula at (t, T).
struct TcevStep {
    double dphi;
    double delta;
    double y;            // X̄_t^{2(1-a)}
    double strike_besq;  // (K / beta(T))^{2(1-a)}
    double spot;         // beta(t) X̄_t
    double discount;     // beta(t) / beta(T)
};

TcevStep prepare(const TcevParams& p, double r, const EuropeanSpec& spec, double xbar_t) {
    p.validate();
    spec.validate();
    require(xbar_t > 0.0, "TCEV price: discounted GOP must be positive");
    const SavingsAccount account{r};
    TcevStep s;
    s.dphi = tcev_phi(p, spec.T) - tcev_phi(p, spec.t);
    s.delta = tcev_dimension(p);
    s.y = tcev_to_besq(p, xbar_t);
    s.strike_besq = tcev_to_besq(p, spec.K / account.beta(spec.T));
    s.spot = account.beta(spec.t) * xbar_t;
    s.discount = account.discount(spec.t, spec.T);
    return s;
}

// 2F0(a, b; ; 1/x) for large x, or NaN when the asymptotic series stalls.
double asymptotic_2f0(double a, double b, double x) {
    double term = 1.0, sum = 1.0;
    for (int n = 0; n < 200; ++n) {
        const double next = term * (a + n) * (b + n) / ((n + 1.0) * x);
        if (std::abs(next) > std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) return sum;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void EuropeanSpec::validate() const {
    require(t >= 0.0, "EuropeanSpec: t must be nonnegative");
    require(T > t, "EuropeanSpec: need T > t");
    require(K >= 0.0, "EuropeanSpec: strike must be nonnegative");
}

KummerBondParams KummerBondParams::from(const Rate32Params& p) {
    p.validate();
    const double s2 = p.sigma * p.sigma;
    KummerBondParams k;
    k.phi_k = p.kappa + 0.5 * s2;
    k.gamma_k = (std::sqrt(k.phi_k * k.phi_k + 2.0 * s2) - k.phi_k) / s2;
    k.alpha_k = 2.0 / s2 * (p.kappa + (1.0 + k.gamma_k) * s2);
    require(k.alpha_k - k.gamma_k > 0.0, "KummerBondParams: alpha - gamma must be positive");
    k.log_gamma_ratio = specfun::ln_gamma(k.alpha_k - k.gamma_k) - specfun::ln_gamma(k.alpha_k);
    k.kappa_theta = p.kappa * p.theta;
    k.x_numerator = 2.0 * p.kappa * p.theta / s2;
    return k;
}

double KummerBondParams::x_of(double r, double tau) const {
    require(r > 0.0, "ir_component_32: short rate must be positive");
    require(tau > 0.0, "ir_component_32: maturity must exceed valuation time");
    return x_numerator / (std::expm1(kappa_theta * tau) * r);
}

double KummerBondParams::bond(double r, double tau) const {
    require(tau >= 0.0, "ir_component_32: need T >= t");
    if (tau == 0.0) return 1.0;
    const double x = x_of(r, tau);
    // Large x: Gamma ratio * x^gamma * 1F1(gamma; alpha; -x) -> 2F0(gamma, gamma - alpha + 1; ; 1/x).
    if (x > 2000.0) {
        const double asymptotic = asymptotic_2f0(gamma_k, gamma_k - alpha_k + 1.0, x);
        if (std::isfinite(asymptotic)) return asymptotic;
    }
    return std::exp(log_gamma_ratio + gamma_k * std::log(x)) * specfun::kummer_1f1(gamma_k, alpha_k, -x);
}

double real_world_put(const TcevParams& p, double r, const EuropeanSpec& spec, double xbar_t) {
    const TcevStep s = prepare(p, r, spec, xbar_t);
    if (spec.K == 0.0) return 0.0;
    const double x = s.y / s.dphi;
    const double threshold = s.strike_besq / s.dphi;
    const double gop_term = s.spot * specfun::nchi2_cdf(threshold, s.delta, x);
    // nchi2_cdf(x; d-2, 0) - nchi2_cdf(x; d-2, th), both evaluated at the same point.
    const double bond_term = spec.K * s.discount *
                             (specfun::nchi2_cdf(x, s.delta - 2.0, 0.0) - specfun::nchi2_cdf(x, s.delta - 2.0, threshold));
    return std::max(0.0, bond_term - gop_term);
}

double real_world_put(const TcevParams& p, double r, const EuropeanSpec& spec) {
    return real_world_put(p, r, spec, p.x0);
}

double real_world_call(const TcevParams& p, double r, const EuropeanSpec& spec, double xbar_t) {
    const TcevStep s = prepare(p, r, spec, xbar_t);
    const double x = s.y / s.dphi;
    const double threshold = s.strike_besq / s.dphi;
    const double gop_term = s.spot * specfun::nchi2_ccdf(threshold, s.delta, x);
    if (spec.K == 0.0) return gop_term;
    const double strike_term = spec.K * s.discount * specfun::nchi2_cdf(x, s.delta - 2.0, threshold);
    return std::max(0.0, gop_term - strike_term);
}

double real_world_call(const TcevParams& p, double r, const EuropeanSpec& spec) {
    return real_world_call(p, r, spec, p.x0);
}

double real_world_price(const TcevParams& p, double r, const EuropeanSpec& spec) {
    return spec.kind == OptionKind::Put ? real_world_put(p, r, spec) : real_world_call(p, r, spec);
}

double mpor_component(const TcevParams& p, double t, double T, double xbar_t) {
    p.validate();
    require(t >= 0.0 && T >= t, "mpor_component: need 0 <= t <= T");
    require(xbar_t > 0.0, "mpor_component: discounted GOP must be positive");
    const double dphi = tcev_phi(p, T) - tcev_phi(p, t);
    if (dphi <= 0.0) return 1.0;
    return specfun::nchi2_cdf(tcev_to_besq(p, xbar_t) / dphi, tcev_dimension(p) - 2.0, 0.0);
}

double mpor_component(const TcevParams& p, double t, double T) { return mpor_component(p, t, T, p.x0); }

double fair_zcb_constant_rate(const TcevParams& p, double r, double t, double T, double xbar_t) {
    require(T > t, "fair_zcb_constant_rate: need T > t");
    return SavingsAccount{r}.discount(t, T) * mpor_component(p, t, T, xbar_t);
}

double fair_zcb_constant_rate(const TcevParams& p, double r, double t, double T) {
    return fair_zcb_constant_rate(p, r, t, T, p.x0);
}

double ir_component_32(const Rate32Params& p, double t, double T, double r_t) {
    require(T > t && t >= 0.0, "ir_component_32: need 0 <= t < T");
    return KummerBondParams::from(p).bond(r_t, T - t);
}

double ir_component_32(const Rate32Params& p, double t, double T) { return ir_component_32(p, t, T, p.r0); }

double hybrid_zcb(const TcevParams& p_tcev, const Rate32Params& p_rate, double t, double T) {
    if (T == t) return 1.0;
    return mpor_component(p_tcev, t, T) * ir_component_32(p_rate, t, T);
}

double rn_call(const TcevParams& p, double r, const EuropeanSpec& spec) {
    const TcevStep s = prepare(p, r, spec, p.x0);
    const double rn_delta = tcev_rn_dimension(p);
    // The GOP leg is the size-biased law of the absorbed process, a BESQ of
    // dimension 4 - rn_delta; the strike leg is its survival above the strike.
    const double gop_term =
        s.spot * (1.0 - besq::cdf_reflecting(s.strike_besq, s.dphi, s.y, 4.0 - rn_delta));
    if (spec.K == 0.0) return gop_term;
    const double strike_term = spec.K * s.discount * besq::tail_integral_schroder(s.strike_besq, s.dphi, s.y, rn_delta);
    return std::max(0.0, gop_term - strike_term);
}

double rn_put(const TcevParams& p, double r, const EuropeanSpec& spec) {
    const double call = rn_call(p, r, spec);
    return call - SavingsAccount{r}.beta(spec.t) * p.x0 + spec.K * SavingsAccount{r}.discount(spec.t, spec.T);
}

}  // namespace benchpricer
