#pragma once

// Real-world prices on quantization grids. A payoff H at T is valued as
// S_0 E[H / S_T] with S_t = beta(t) X̄_t, so on a GOP grid the expectation is a
// probability-weighted sum over the codewords of the payoff step.

#include <functional>
#include <vector>

#include "benchpricer/analytic.hpp"
#include "benchpricer/quantize.hpp"

namespace benchpricer {

struct BermudanSpec {
    std::vector<double> exercise_times;  // increasing, within (0, T]
    double K = 0.0;
    OptionKind kind = OptionKind::Put;

    void validate() const;
};

/// Option with expiry T on the zero-coupon bond maturing at S.
struct BondOptionSpec {
    double T = 1.0;
    double S = 2.0;
    double K = 0.0;
    OptionKind kind = OptionKind::Put;

    void validate() const;
};

/// S_0 sum_j p_j payoff(beta(T) g_j) / (beta(T) g_j) on the grid step at T.
/// payoff receives the nominal GOP value.
double european_price_rmq(const QuantGrid& grid, double r, double T, const std::function<double(double)>& payoff);

/// Vanilla put or call; requires spec.t = 0 and spec.T on the grid.
double european_price_rmq(const QuantGrid& grid, double r, const EuropeanSpec& spec);

/// Backward induction on benchmarked values, exercising when the benchmarked
/// exercise value beats the one-step conditional expectation.
double bermudan_price_rmq(const QuantGrid& grid, double r, const BermudanSpec& spec);

/// E[exp(-int_0^T r) X̄_0 / X̄_T] from the forward state prices, with the rate
/// accrued at the left endpoint of each step.
double hybrid_zcb_rmq(const JointQuantGrid& grid, double T);

/// hybrid_zcb_rmq at every grid time; element k belongs to grid.times()[k].
std::vector<double> hybrid_zcb_curve_rmq(const JointQuantGrid& grid);

/// E[exp(-int_0^T r) X̄_0 / X̄_T (K - P(T, S))^+] (or the call) where the bond
/// price at a node is M(X̄_T, T, S) G(r_T, S - T).
double zcb_option_price_rmq(const JointQuantGrid& grid, const Rate32Params& p_rate, const TcevParams& p_tcev,
                            const BondOptionSpec& spec);

struct BondOptionComparison {
    double rw_put;
    double rn_put;
    double rw_call;
    double rn_call;
};

/// Real-world bond options next to the classical versions, which price the
/// bond as G alone and discount with exp(-int r) only.
BondOptionComparison rn_bond_option_comparators(const JointQuantGrid& grid, const Rate32Params& p_rate,
                                                const TcevParams& p_tcev, double T, double S, double K);

}  // namespace benchpricer
