#pragma once

// Scalar special functions used by the analytic pricing formulas.
//
// Every function is pure and thread-safe. Domain violations throw
// benchpricer::DomainError; series that fail to converge throw
// benchpricer::ConvergenceError.

namespace benchpricer::specfun {

/// Natural log of the gamma function for x > 0.
double ln_gamma(double x);

/// Regularized lower incomplete gamma P(s, x), s > 0, x >= 0.
double reg_lower_gamma(double s, double x);

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).
double reg_upper_gamma(double s, double x);

/// Modified Bessel function of the first kind I_nu(x), x >= 0, any real nu.
/// Throws DomainError if the result overflows a double; use the scaled or
/// log variants for large arguments.
double bessel_i(double nu, double x);

/// exp(-x) * I_nu(x). Finite for every x >= 0.
double bessel_i_scaled(double nu, double x);

/// log(I_nu(x)); requires I_nu(x) > 0 (always true for nu > -1, x > 0).
double log_bessel_i(double nu, double x);

/// Kummer's confluent hypergeometric function 1F1(a; b; x).
/// Negative arguments are evaluated through the Kummer transformation
/// 1F1(a; b; x) = e^x 1F1(b - a; b; -x).
double kummer_1f1(double a, double b, double x);

/// CDF of the noncentral chi-squared law with k degrees of freedom and
/// noncentrality lambda; lambda = 0 reduces to the central law.
double nchi2_cdf(double x, double k, double lambda);

/// 1 - nchi2_cdf, summed directly to keep small upper tails accurate.
double nchi2_ccdf(double x, double k, double lambda);

/// Density of the noncentral chi-squared law. At x = 0 the density is
/// +infinity for k < 2.
double nchi2_pdf(double x, double k, double lambda);

/// Inverse of nchi2_cdf in x for 0 < p < 1.
double nchi2_quantile(double p, double k, double lambda);

double normal_cdf(double x);
double normal_pdf(double x);

/// Phi(b) - Phi(a) for a <= b, evaluated on the side of the mean that
/// avoids cancellation.
double normal_cdf_diff(double a, double b);

/// P(Z1 <= h, Z2 <= k) for standard normals with correlation rho, |rho| <= 1.
/// Infinite limits are accepted.
double bivariate_normal_cdf(double h, double k, double rho);

}  // namespace benchpricer::specfun
