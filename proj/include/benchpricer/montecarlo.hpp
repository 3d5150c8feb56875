#pragma once

// Monte Carlo reference prices. Paths are generated in fixed-size batches,
// each from its own sub-stream of cfg.seed, and batch statistics are merged
// in batch order, so results do not depend on the number of worker threads
// (BENCHPRICER_THREADS caps it; default is the hardware concurrency).

#include <cstdint>
#include <functional>
#include <vector>

#include "benchpricer/analytic.hpp"
#include "benchpricer/pricers.hpp"

namespace benchpricer {

struct McConfig {
    std::int64_t paths = 100000;
    int steps_per_year = 12;
    std::uint64_t seed = 1;
    /// Pairs each path with its mirror; paths must then be even.
    bool antithetic = false;

    void validate() const;
};

struct McEstimate {
    double mean = 0.0;
    /// Sample standard deviation over sqrt(samples); a sample is one path, or
    /// one antithetic pair average.
    double std_error = 0.0;
    std::int64_t paths = 0;
};

/// Worker count from BENCHPRICER_THREADS, else the hardware concurrency.
int worker_count();

/// S_t E[payoff(S_T) / S_T] with X̄_T drawn exactly in one step from p.x0 at t.
McEstimate mc_european(const TcevParams& p, double r, double t, double T, const std::function<double(double)>& payoff,
                       const McConfig& cfg);
McEstimate mc_european(const TcevParams& p, double r, const EuropeanSpec& spec, const McConfig& cfg);

/// Longstaff-Schwartz on benchmarked values with exact transitions between
/// exercise dates; continuation regressed on monomials of X̄ up to
/// basis_degree over in-the-money paths. Rank-deficient regressions drop to a
/// lower degree with a warning on stderr.
McEstimate mc_bermudan_lsmc(const TcevParams& p, double r, const BermudanSpec& spec, const McConfig& cfg,
                            int basis_degree = 3);

/// mc_bermudan_lsmc for several strikes on one set of paths.
std::vector<McEstimate> mc_bermudan_lsmc_strikes(const TcevParams& p, double r,
                                                 const std::vector<double>& exercise_times,
                                                 const std::vector<double>& strikes, OptionKind kind,
                                                 const McConfig& cfg, int basis_degree = 3);

/// Euler paths of the 3/2 rate floored at 1e-8, trapezoidal accrual.
struct Rate32PathStats {
    McEstimate discount;      // E[exp(-int_0^T r)]
    McEstimate terminal_rate;  // E[r_T]
};
Rate32PathStats mc_rate32_euler_paths(const Rate32Params& p, double T, const McConfig& cfg);

/// How X̄ is advanced in the hybrid simulation.
///   Exact: long steps between maturities from the transition law (rho = 0).
///   Euler: plain Euler on X̄, floored at 1e-8. Paths that reach the floor
///     give huge X̄_0 / X̄_T weights, so this is kept for comparison only.
///   SquareRoot: per step, with Y = X̄^{2(1-a)} and dphi the clock increment,
///     Y' = (sqrt(Y) + sqrt(dphi) Z)^2 + dphi chi2(delta - 1), Z the normal
///     correlated with the rate. Each step has the exact transition law and
///     Z carries the leading-order noise, so the pair is correlated as in
///     an Euler step.
///   Automatic: Exact when rho = 0, SquareRoot otherwise.
enum class GopScheme { Automatic, Exact, Euler, SquareRoot };

/// E[exp(-int_0^T r) X̄_0 / X̄_T] for each maturity on one set of paths.
/// Maturities must increase and sit on the 1/steps_per_year time grid.
std::vector<McEstimate> mc_hybrid_zcb_curve(const Rate32Params& p_rate, const TcevParams& p_tcev, double rho,
                                            const std::vector<double>& maturities, const McConfig& cfg,
                                            GopScheme scheme = GopScheme::Automatic);
McEstimate mc_hybrid_zcb(const Rate32Params& p_rate, const TcevParams& p_tcev, double rho, double T,
                         const McConfig& cfg, GopScheme scheme = GopScheme::Automatic);

/// Bond options at expiry T on the bond maturing at S, one estimate per
/// strike on shared paths; the bond price at expiry is M(X̄_T) G(r_T).
std::vector<McEstimate> mc_zcb_option_strikes(const Rate32Params& p_rate, const TcevParams& p_tcev, double rho,
                                              double T, double S, const std::vector<double>& strikes,
                                              OptionKind kind, const McConfig& cfg,
                                              GopScheme scheme = GopScheme::Automatic);
McEstimate mc_zcb_option(const Rate32Params& p_rate, const TcevParams& p_tcev, double rho,
                         const BondOptionSpec& spec, const McConfig& cfg, GopScheme scheme = GopScheme::Automatic);

}  // namespace benchpricer
