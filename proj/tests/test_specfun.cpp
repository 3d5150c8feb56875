#include <gtest/gtest.h>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "benchpricer/errors.hpp"
#include "benchpricer/specfun.hpp"
#include "support/quadrature.hpp"

using namespace benchpricer;
using namespace benchpricer::specfun;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST(LnGamma, KnownValues) {
    EXPECT_EQ(ln_gamma(1.0), 0.0);
    EXPECT_NEAR(ln_gamma(0.5), std::log(std::sqrt(std::numbers::pi)), 1e-15);
    // mpmath quadrature of the gamma integral.
    EXPECT_LT(rel_err(ln_gamma(7.3), 7.147892523022249), 1e-12);
}

TEST(LnGamma, RejectsNonPositive) {
    EXPECT_THROW(ln_gamma(0.0), DomainError);
    EXPECT_THROW(ln_gamma(-2.5), DomainError);
}

TEST(LnGamma, RelativeAccuracyAcrossRange) {
    for (double x : {1e-3, 0.3, 1.5, 2.0001, 9.75, 123.4, 999.0}) {
        const double want = boost::math::lgamma(x);
        EXPECT_LT(std::abs(ln_gamma(x) - want), 1e-12 * std::max(1.0, std::abs(want))) << x;
    }
}

TEST(RegLowerGamma, KnownValues) {
    EXPECT_NEAR(reg_lower_gamma(1.0, 1.0), 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_EQ(reg_lower_gamma(2.5, 0.0), 0.0);
    EXPECT_NEAR(reg_lower_gamma(3.7, 2.2), 0.22976730879644322, 1e-14);
    EXPECT_EQ(reg_lower_gamma(2.0, INFINITY), 1.0);
}

TEST(RegLowerGamma, MonotoneAndComplementary) {
    for (double s : {0.3, 1.0, 4.2, 50.0}) {
        double prev = 0.0;
        for (double x = 0.0; x < 3.0 * s + 20.0; x += 0.37) {
            const double p = reg_lower_gamma(s, x);
            EXPECT_GE(p, prev - 1e-15);
            EXPECT_NEAR(p + reg_upper_gamma(s, x), 1.0, 1e-14);
            prev = p;
        }
    }
}

TEST(RegLowerGamma, Domain) {
    EXPECT_THROW(reg_lower_gamma(0.0, 1.0), DomainError);
    EXPECT_THROW(reg_lower_gamma(1.0, -1.0), DomainError);
}

TEST(BesselI, HalfIntegerClosedForm) {
    const double x = 1.0;
    const double want = std::sqrt(2.0 / (std::numbers::pi * x)) * std::sinh(x);
    EXPECT_NEAR(bessel_i(0.5, x), want, 1e-14);
    EXPECT_NEAR(bessel_i(0.5, 1.0), 0.9376748882, 1e-10);
}

TEST(BesselI, AtZero) {
    EXPECT_EQ(bessel_i(0.0, 0.0), 1.0);
    EXPECT_EQ(bessel_i(1.7, 0.0), 0.0);
    EXPECT_EQ(bessel_i(3.0, 0.0), 0.0);
}

TEST(BesselI, FrozenSeriesValues) {
    EXPECT_LT(rel_err(bessel_i(1.8, 3.4), 3.8975278862774614), 1e-12);
    EXPECT_LT(rel_err(bessel_i(-1.3, 0.7), -0.50221185017567272), 1e-12);
    EXPECT_LT(rel_err(bessel_i_scaled(2.25, 45.0), 0.056340678947669658), 1e-12);
}

TEST(BesselI, MatchesBoostOverRange) {
    for (double nu : {-0.7, 0.0, 0.3, 1.0, 1.75, 4.4}) {
        for (double x : {0.01, 0.5, 2.0, 9.0, 29.0, 31.0, 80.0, 300.0, 690.0}) {
            const double want = boost::math::cyl_bessel_i(nu, x);
            EXPECT_LT(rel_err(bessel_i(nu, x), want), 1e-10) << nu << " " << x;
        }
    }
}

TEST(BesselI, Recurrence) {
    for (double nu : {-0.45, 0.2, 0.5, 1.3, 2.7}) {
        for (double x : {0.1, 1.0, 5.0, 25.0, 40.0, 200.0}) {
            const double lhs = bessel_i_scaled(nu - 1.0, x) - bessel_i_scaled(nu + 1.0, x);
            const double rhs = 2.0 * nu / x * bessel_i_scaled(nu, x);
            EXPECT_LT(std::abs(lhs - rhs), 1e-8 * std::abs(rhs)) << nu << " " << x;
        }
    }
}

TEST(BesselI, OverflowAndLogVariant) {
    EXPECT_THROW(bessel_i(1.0, 800.0), DomainError);
    const double log_i = log_bessel_i(1.0, 800.0);
    EXPECT_NEAR(log_i, 800.0 + std::log(bessel_i_scaled(1.0, 800.0)), 1e-10);
    EXPECT_THROW(bessel_i(1.0, -1.0), DomainError);
}

TEST(Kummer, ClosedForms) {
    EXPECT_EQ(kummer_1f1(0.3, 1.7, 0.0), 1.0);
    EXPECT_NEAR(kummer_1f1(1.0, 2.0, 1.0), std::exp(1.0) - 1.0, 1e-14);
    EXPECT_NEAR(kummer_1f1(1.0, 2.0, 1.0), 1.7182818285, 1e-10);
    // 1F1(a; a; x) = e^x.
    EXPECT_LT(rel_err(kummer_1f1(2.5, 2.5, -30.0), std::exp(-30.0)), 1e-12);
}

TEST(Kummer, FrozenValues) {
    EXPECT_LT(rel_err(kummer_1f1(0.8, 3.1, -5.0), 0.41890658463416752), 1e-12);
    EXPECT_LT(rel_err(kummer_1f1(0.25, 13.78, -300.0), 0.45296591536812913), 1e-9);
}

TEST(Kummer, TransformIdentityOnRandomGrid) {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> ua(0.05, 3.0), ub(0.5, 15.0), ux(-60.0, 60.0);
    for (int i = 0; i < 200; ++i) {
        const double a = ua(gen), b = ub(gen), x = ux(gen);
        const double lhs = kummer_1f1(a, b, x);
        const double rhs = std::exp(x) * kummer_1f1(b - a, b, -x);
        EXPECT_LT(std::abs(lhs - rhs), 1e-8 * std::abs(lhs)) << a << " " << b << " " << x;
        const double boost_value = boost::math::hypergeometric_1F1(a, b, x);
        EXPECT_LT(rel_err(lhs, boost_value), 1e-9) << a << " " << b << " " << x;
    }
}

TEST(Kummer, Domain) {
    EXPECT_THROW(kummer_1f1(1.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(kummer_1f1(1.0, -2.0, 1.0), DomainError);
}

TEST(NoncentralChi2, Edges) {
    EXPECT_EQ(nchi2_cdf(0.0, 2.3, 4.0), 0.0);
    EXPECT_NEAR(nchi2_cdf(2.0, 2.0, 0.0), 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_EQ(nchi2_cdf(1.7, 3.3, 0.0), reg_lower_gamma(1.65, 0.85));
    EXPECT_NEAR(nchi2_pdf(0.0, 2.0, 0.0), 0.5, 1e-15);
    EXPECT_NEAR(nchi2_pdf(1.3, 2.0, 0.0), 0.5 * std::exp(-0.65), 1e-15);
    EXPECT_THROW(nchi2_cdf(-1.0, 2.0, 1.0), DomainError);
    EXPECT_THROW(nchi2_cdf(1.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(nchi2_pdf(1.0, 2.0, -1.0), DomainError);
}

TEST(NoncentralChi2, FrozenValues) {
    // Poisson-mixture series and quadrature of the density agree to 17 digits.
    EXPECT_NEAR(nchi2_cdf(5.0, 2.43, 7.7), 0.20213777006607439, 1e-12);
    EXPECT_NEAR(nchi2_pdf(3.3, 1.7, 4.1), 0.10742061610882472, 1e-10);
    EXPECT_NEAR(nchi2_cdf(1500.0, 3.4, 1400.0), 0.90003212730716463, 1e-10);
}

TEST(NoncentralChi2, QuantileInvertsCdf) {
    EXPECT_NEAR(nchi2_quantile(0.3, 2.43, 7.7), 6.3877791435580613, 1e-12);
    EXPECT_NEAR(nchi2_quantile(1e-9, 1.7, 0.4) / 6.1151656054112414e-11, 1.0, 1e-10);
    EXPECT_NEAR(nchi2_quantile(0.999999, 3.4, 60.0), 159.25784747003426, 1e-9);
    EXPECT_NEAR(nchi2_quantile(0.5, 0.6, 0.0), 0.14626227173390381, 1e-13);
    for (double p : {1e-12, 0.01, 0.5, 0.9, 1.0 - 1e-10}) {
        const double x = nchi2_quantile(p, 5.2, 12.0);
        const double back = p > 0.5 ? 1.0 - nchi2_ccdf(x, 5.2, 12.0) : nchi2_cdf(x, 5.2, 12.0);
        EXPECT_NEAR(back / p, 1.0, 1e-10) << p;
    }
    EXPECT_LT(nchi2_quantile(0.2, 3.0, 1.0), nchi2_quantile(0.21, 3.0, 1.0));
    EXPECT_THROW(nchi2_quantile(0.0, 2.0, 1.0), DomainError);
    EXPECT_THROW(nchi2_quantile(1.0, 2.0, 1.0), DomainError);
    EXPECT_THROW(nchi2_quantile(0.5, 0.0, 1.0), DomainError);
}

TEST(NoncentralChi2, MatchesBoostAcrossParameters) {
    for (double k : {0.4, 1.4021, 2.43, 3.4021, 7.0}) {
        for (double lambda : {0.0, 0.3, 2.5, 40.0, 900.0}) {
            boost::math::non_central_chi_squared dist(k, lambda);
            const double mean = k + lambda;
            for (double frac : {0.05, 0.4, 0.9, 1.0, 1.3, 2.5}) {
                const double x = frac * mean;
                EXPECT_NEAR(nchi2_cdf(x, k, lambda), boost::math::cdf(dist, x), 1e-10) << k << " " << lambda << " " << x;
                EXPECT_NEAR(nchi2_ccdf(x, k, lambda), boost::math::cdf(boost::math::complement(dist, x)), 1e-10);
                const double pdf = boost::math::pdf(dist, x);
                EXPECT_LT(std::abs(nchi2_pdf(x, k, lambda) - pdf), 1e-10 * std::max(1.0, pdf));
            }
        }
    }
}

TEST(NoncentralChi2, MonotoneWithLimits) {
    for (double k : {0.6, 1.4, 3.4}) {
        for (double lambda : {0.0, 1.1, 17.0, 240.0}) {
            double prev = 0.0;
            const double top = k + lambda + 40.0 * std::sqrt(2.0 * k + 4.0 * lambda);
            for (int i = 0; i <= 400; ++i) {
                const double x = top * i / 400.0;
                const double f = nchi2_cdf(x, k, lambda);
                EXPECT_GE(f, prev - 1e-15);
                prev = f;
            }
            EXPECT_NEAR(nchi2_cdf(top, k, lambda), 1.0, 1e-6);
        }
    }
}

TEST(NoncentralChi2, DerivativeMatchesDensity) {
    const double h = 1e-5;
    for (auto [k, lambda] : {std::pair{1.7, 4.1}, std::pair{3.4, 12.0}, std::pair{2.43, 0.0}}) {
        for (int i = 1; i <= 100; ++i) {
            const double x = 0.2 * i;
            const double fd = (nchi2_cdf(x + h, k, lambda) - nchi2_cdf(x - h, k, lambda)) / (2 * h);
            EXPECT_NEAR(fd, nchi2_pdf(x, k, lambda), 1e-5) << k << " " << lambda << " " << x;
        }
    }
}

TEST(NoncentralChi2, DensityIntegratesToOne) {
    for (auto [k, lambda] : {std::pair{1.7, 4.1}, std::pair{3.4021, 265.0}, std::pair{0.6, 0.8}}) {
        auto pdf = [&](double x) { return nchi2_pdf(x, k, lambda); };
        const double mass = testsupport::integrate_endpoint_singular(pdf, 0.0, 1.0) + testsupport::integrate(pdf, 1.0, INFINITY);
        EXPECT_NEAR(mass, 1.0, 1e-8) << k << " " << lambda;
    }
}

TEST(Normal, Values) {
    EXPECT_EQ(normal_cdf(0.0), 0.5);
    EXPECT_NEAR(normal_cdf(1.96), 0.97500210485177957, 1e-14);
    for (double x : {0.1, 1.3, 4.0, 9.0}) EXPECT_NEAR(normal_cdf(-x), 1.0 - normal_cdf(x), 1e-15);
    EXPECT_NEAR(normal_pdf(0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-16);
    EXPECT_NEAR(normal_cdf_diff(7.0, 8.0), 0.5 * (std::erfc(7.0 / std::sqrt(2.0)) - std::erfc(8.0 / std::sqrt(2.0))), 1e-30);
    EXPECT_NEAR(normal_cdf_diff(-INFINITY, INFINITY), 1.0, 1e-16);
}

TEST(BivariateNormal, IndependenceAndLimits) {
    EXPECT_NEAR(bivariate_normal_cdf(0.3, -0.4, 0.0), normal_cdf(0.3) * normal_cdf(-0.4), 1e-15);
    EXPECT_NEAR(bivariate_normal_cdf(0.0, 0.0, 0.5), 0.25 + std::asin(0.5) / (2 * std::numbers::pi), 1e-14);
    EXPECT_NEAR(bivariate_normal_cdf(1.1, INFINITY, 0.7), normal_cdf(1.1), 1e-15);
    EXPECT_EQ(bivariate_normal_cdf(-INFINITY, 0.2, -0.3), 0.0);
}

TEST(BivariateNormal, MatchesConditionalQuadrature) {
    for (double rho : {-0.95, -0.9, -0.6, -0.2, 0.1, 0.5, 0.8, 0.93, 0.99}) {
        for (double h : {-2.5, -0.7, 0.0, 1.2, 3.0}) {
            for (double k : {-1.9, 0.4, 2.2}) {
                const double s = std::sqrt(1.0 - rho * rho);
                const double want = testsupport::integrate(
                    [&](double z) { return normal_pdf(z) * normal_cdf((k - rho * z) / s); }, -INFINITY, h);
                EXPECT_NEAR(bivariate_normal_cdf(h, k, rho), want, 1e-10) << rho << " " << h << " " << k;
            }
        }
    }
}
