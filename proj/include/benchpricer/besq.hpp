#pragma once

// Squared Bessel process analytics: transition densities in the three
// dimension regimes, boundary behaviour at zero, the CIR time change and the
// expectation of the strict local martingale X^{1 - delta/2}.
//
// Times are in the process' own clock. Dimension delta == 2 is rejected.

namespace benchpricer::besq {

enum class Boundary { Absorbing, Reflecting, None };

/// A BESQ^delta process started at x0 with a boundary condition at zero.
struct BesqSpec {
    double delta;
    double x0;
    Boundary boundary;

    /// None requires delta > 2; Reflecting requires 0 < delta < 2;
    /// Absorbing requires delta < 2.
    void validate() const;
};

/// dS = kappa (theta - S) dt + sigma sqrt(S) dW, S_0 = s0.
struct CirParams {
    double kappa;
    double theta;
    double sigma;
    double s0;

    void validate() const;
};

/// S_t = scale * X_phi with X a BESQ of dimension delta.
struct TimeChange {
    double phi;
    double scale;
    double delta;
};

/// Norm-decreasing density of the process killed at zero, delta < 2.
/// Integrates to the survival probability nchi2_cdf(x0/T; 2 - delta, 0).
double density_norm_decreasing(double xT, double T, double x0, double delta);

/// (1/T) * nchi2_pdf(xT/T; delta, x0/T). For 0 < delta < 2 this is the
/// reflecting-boundary density; for delta > 2 the unconstrained one.
double density_reflecting(double xT, double T, double x0, double delta);

/// P(X_T <= xT) under density_reflecting, delta > 0.
double cdf_reflecting(double xT, double T, double x0, double delta);

/// P(X_T <= xT) for the absorbed process (delta < 2), including the atom at 0.
double cdf_absorbing(double xT, double T, double x0, double delta);

/// Mass of the atom at zero for the absorbed process.
double absorption_probability(double T, double x0, double delta);

/// Integral of density_norm_decreasing over [lower, inf).
double tail_integral_schroder(double lower, double T, double x0, double delta);

/// P(X_T <= xT) dispatching on the boundary condition of the spec.
double transition_cdf(const BesqSpec& spec, double xT, double T);

TimeChange cir_time_change(const CirParams& p, double t);

/// E[X_T^{1 - delta/2}] for delta > 2; strictly below x0^{1 - delta/2}.
double power_local_martingale_expectation(double x0, double T, double delta);

}  // namespace benchpricer::besq
