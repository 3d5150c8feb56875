#pragma once

// TCEV model for the discounted growth-optimal portfolio, the 3/2 short rate,
// and a constant-rate savings account. Defaults are the reference parameter
// set used throughout the experiments.

#include "benchpricer/random.hpp"

namespace benchpricer {

struct TcevParams {
    double alpha0 = 51.34;
    double eta = 0.1239;
    double c = 0.1010;
    double a = 0.2868;
    double x0 = 50.0;  // initial discounted GOP

    /// c > 0, a < 1, alpha0 > 0, eta > 0, x0 > 0.
    void validate() const;
};

struct Rate32Params {
    double kappa = 3.5726;
    double theta = 0.096;
    double sigma = 0.7960;
    double r0 = 0.05;

    void validate() const;
};

struct SavingsAccount {
    double r = 0.05;

    double beta(double t) const;
    /// beta(t) / beta(T).
    double discount(double t, double T) const;
};

double tcev_alpha(const TcevParams& p, double t);

/// Market price of risk c (x / alpha_t)^{a-1}.
double tcev_mpor(const TcevParams& p, double x, double t);

/// c^2 alpha_t^{2(1-a)} x^{2a-1}.
double tcev_drift(const TcevParams& p, double x, double t);

/// c alpha_t^{1-a} x^a.
double tcev_diffusion(const TcevParams& p, double x, double t);

/// BESQ clock: X̄_t^{2(1-a)} is a BESQ sampled at tcev_phi(t).
double tcev_phi(const TcevParams& p, double t);

/// (3 - 2a) / (1 - a); always > 2.
double tcev_dimension(const TcevParams& p);

/// (1 - 2a) / (1 - a), the dimension used by the risk-neutral comparator.
/// Algebraically this is 4 - tcev_dimension, not tcev_dimension - 2.
double tcev_rn_dimension(const TcevParams& p);

/// x^{2(1-a)} and its inverse.
double tcev_to_besq(const TcevParams& p, double x);
double tcev_from_besq(const TcevParams& p, double y);

/// Draw X̄_T given X̄_t = x_t from the exact transition law.
double tcev_exact_sample(const TcevParams& p, double x_t, double t, double T, RandomSource& rng);

/// kappa (theta r - r^2).
double rate32_drift(const Rate32Params& p, double r);

/// sigma r^{3/2}.
double rate32_diffusion(const Rate32Params& p, double r);

}  // namespace benchpricer
