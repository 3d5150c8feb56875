#pragma once

// Closed-form real-world prices under TCEV with a constant short rate, the
// fair zero-coupon bond and its market-price-of-risk / interest-rate split,
// and the hypothetical risk-neutral comparators.
//
// Functions without an explicit state argument read the discounted GOP at the
// valuation time from TcevParams::x0 (and the short rate from Rate32Params::r0).
// Prices are nominal; the GOP at time t is beta(t) * X̄_t.

#include "benchpricer/models.hpp"

namespace benchpricer {

enum class OptionKind { Put, Call };

struct EuropeanSpec {
    double t = 0.0;  // valuation time
    double T = 1.0;  // expiry
    double K = 0.0;  // strike
    OptionKind kind = OptionKind::Put;

    void validate() const;
};

/// Parameters of the 3/2 bond function G, fixed per Rate32Params.
struct KummerBondParams {
    double alpha_k;
    double gamma_k;
    double phi_k;  // kappa + sigma^2 / 2
    double log_gamma_ratio;  // ln Gamma(alpha - gamma) - ln Gamma(alpha)
    double kappa_theta;
    double x_numerator;  // 2 kappa theta / sigma^2

    static KummerBondParams from(const Rate32Params& p);

    /// x(r, tau) = 2 kappa theta / (sigma^2 (e^{kappa theta tau} - 1) r).
    double x_of(double r, double tau) const;

    /// G(r, tau); equals 1 at tau = 0.
    double bond(double r, double tau) const;
};

double real_world_put(const TcevParams& p, double r, const EuropeanSpec& spec, double xbar_t);
double real_world_put(const TcevParams& p, double r, const EuropeanSpec& spec);
double real_world_call(const TcevParams& p, double r, const EuropeanSpec& spec, double xbar_t);
double real_world_call(const TcevParams& p, double r, const EuropeanSpec& spec);

/// Dispatches on spec.kind.
double real_world_price(const TcevParams& p, double r, const EuropeanSpec& spec);

/// (beta(t)/beta(T)) * mpor_component.
double fair_zcb_constant_rate(const TcevParams& p, double r, double t, double T, double xbar_t);
double fair_zcb_constant_rate(const TcevParams& p, double r, double t, double T);

/// Probability that the inverse of the BESQ-time-changed discounted GOP has
/// not been absorbed: nchi2_cdf(X̄_t^{2(1-a)} / dphi; delta - 2, 0).
double mpor_component(const TcevParams& p, double t, double T, double xbar_t);
double mpor_component(const TcevParams& p, double t, double T);

/// E[exp(-int_t^T r ds)] under the 3/2 dynamics.
double ir_component_32(const Rate32Params& p, double t, double T, double r_t);
double ir_component_32(const Rate32Params& p, double t, double T);

/// mpor_component * ir_component_32, independent rate and GOP.
double hybrid_zcb(const TcevParams& p_tcev, const Rate32Params& p_rate, double t, double T);

/// Classical price: the call formula with the absorbed sub-2 dimension
/// tcev_rn_dimension, evaluated through the BESQ transition functions.
double rn_call(const TcevParams& p, double r, const EuropeanSpec& spec);

/// rn_call - S_t + K beta(t)/beta(T).
double rn_put(const TcevParams& p, double r, const EuropeanSpec& spec);

}  // namespace benchpricer
