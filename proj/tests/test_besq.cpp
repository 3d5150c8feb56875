#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "benchpricer/besq.hpp"
#include "benchpricer/errors.hpp"
#include "benchpricer/specfun.hpp"
#include "support/quadrature.hpp"

using namespace benchpricer;
using namespace benchpricer::besq;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Integral of a BESQ density over (0, inf), split so the possible singularity
// at zero is handled by tanh-sinh.
template <class F>
double total_mass(F f, double split) {
    return testsupport::integrate_endpoint_singular(f, 0.0, split) +
           testsupport::integrate(f, split, std::numeric_limits<double>::infinity());
}

}  // namespace

TEST(DensityNormDecreasing, FrozenValue) {
    // mpmath evaluation of the Bessel form.
    EXPECT_LT(rel_err(density_norm_decreasing(1.0, 1.0, 1.0, 0.5), 0.13679359334083601), 1e-12);
}

TEST(DensityNormDecreasing, MassIsSurvivalProbability) {
    for (double delta : {-1.0, 0.0, 0.5, 1.5}) {
        for (double T : {0.4, 1.0, 3.0}) {
            const double x0 = 1.3;
            const double mass = total_mass([&](double x) { return density_norm_decreasing(x, T, x0, delta); }, 1.0);
            const double survive = specfun::nchi2_cdf(x0 / T, 2.0 - delta, 0.0);
            EXPECT_NEAR(mass, survive, 1e-9) << delta << " " << T;
            EXPECT_LE(survive, 1.0);
            EXPECT_NEAR(tail_integral_schroder(0.0, T, x0, delta), survive, 1e-14);
        }
    }
}

TEST(DensityNormDecreasing, RejectsBadArguments) {
    EXPECT_THROW(density_norm_decreasing(1.0, 1.0, 1.0, 2.0), DomainError);
    EXPECT_THROW(density_norm_decreasing(1.0, 1.0, 1.0, 2.5), DomainError);
    EXPECT_THROW(density_norm_decreasing(0.0, 1.0, 1.0, 0.5), DomainError);
    EXPECT_THROW(density_norm_decreasing(1.0, 0.0, 1.0, 0.5), DomainError);
    EXPECT_THROW(density_norm_decreasing(1.0, 1.0, -1.0, 0.5), DomainError);
}

TEST(DensityReflecting, FrozenValueAndNormalization) {
    EXPECT_LT(rel_err(density_reflecting(2.0, 1.5, 1.0, 2.9), 0.13386516473559174), 1e-12);
    for (double delta : {0.4, 1.5, 2.9, 3.4}) {
        const double mass = total_mass([&](double x) { return density_reflecting(x, 0.8, 1.1, delta); }, 1.0);
        EXPECT_NEAR(mass, 1.0, 1e-8) << delta;
    }
    EXPECT_THROW(density_reflecting(1.0, 1.0, 1.0, 0.0), DomainError);
    EXPECT_THROW(density_reflecting(1.0, 1.0, 1.0, 2.0), DomainError);
}

TEST(DensityReflecting, EqualsScaledNoncentralChiSquared) {
    for (double xT : {0.1, 1.0, 4.0})
        for (double delta : {0.7, 3.4})
            EXPECT_DOUBLE_EQ(density_reflecting(xT, 2.0, 1.5, delta), specfun::nchi2_pdf(xT / 2.0, delta, 0.75) / 2.0);
}

// X_T^{1-d/2} p_d(X_T; X_0) = X_0^{1-d/2} q_{4-d}(X_T; X_0) and
// q_d(X_T; X_0) = p_{4-d}(X_0; X_T) on a 50x50 grid.
TEST(BesqSymmetry, PowerAndReversalIdentities) {
    const double T = 1.3;
    for (double delta : {2.5, 3.0, 3.4}) {
        const double power = 1.0 - 0.5 * delta;
        double worst_power = 0.0;
        double worst_reversal = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double xT = 0.05 + 0.2 * i;
            for (int j = 0; j < 50; ++j) {
                const double x0 = 0.05 + 0.2 * j;
                const double lhs = std::pow(xT, power) * density_reflecting(xT, T, x0, delta);
                const double rhs = std::pow(x0, power) * density_norm_decreasing(xT, T, x0, 4.0 - delta);
                worst_power = std::max(worst_power, rel_err(lhs, rhs));
                const double p = density_reflecting(xT, T, x0, delta);
                const double q = density_norm_decreasing(x0, T, xT, 4.0 - delta);
                worst_reversal = std::max(worst_reversal, rel_err(q, p));
            }
        }
        EXPECT_LT(worst_power, 1e-8) << delta;
        EXPECT_LT(worst_reversal, 1e-8) << delta;
    }
}

TEST(BesqChapmanKolmogorov, CompositionOverIntermediateTime) {
    const double x0 = 1.0;
    const double s = 0.6;
    const double T = 1.5;
    for (double delta : {1.2, 3.4}) {
        for (double xT : {0.3, 1.0, 2.5, 6.0}) {
            const double composed = total_mass(
                [&](double y) { return density_reflecting(y, s, x0, delta) * density_reflecting(xT, T - s, y, delta); }, 1.0);
            EXPECT_NEAR(composed, density_reflecting(xT, T, x0, delta), 1e-5) << delta << " " << xT;
        }
    }
}

TEST(BesqNoAtom, MassNearZeroVanishesFasterThanEpsilon) {
    for (double delta : {2.5, 3.0, 3.4}) {
        double previous_ratio = 0.0;
        for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
            const double mass = cdf_reflecting(eps, 1.0, 1.0, delta);
            const double ratio = mass / std::pow(eps, 0.5 * delta);
            EXPECT_LT(mass, eps);
            if (previous_ratio > 0.0) EXPECT_LT(rel_err(ratio, previous_ratio), 0.05) << delta << " " << eps;
            previous_ratio = ratio;
        }
    }
}

TEST(CdfAbsorbing, AtomLimitAndFrozenValue) {
    const double T = 0.9, x0 = 1.4, delta = 0.6;
    EXPECT_NEAR(cdf_absorbing(0.0, T, x0, delta), 1.0 - specfun::nchi2_cdf(x0 / T, 2.0 - delta, 0.0), 1e-15);
    EXPECT_DOUBLE_EQ(absorption_probability(T, x0, delta), cdf_absorbing(0.0, T, x0, delta));
    EXPECT_EQ(cdf_absorbing(std::numeric_limits<double>::infinity(), T, x0, delta), 1.0);
    EXPECT_NEAR(cdf_absorbing(1e6, T, x0, delta), 1.0, 1e-14);
    // mpmath: one minus the quadrature of the norm-decreasing density above 1.
    EXPECT_NEAR(cdf_absorbing(1.0, 1.0, 1.0, -1.0), 0.86770144583642383, 1e-12);
}

TEST(CdfAbsorbing, AtomPlusDensityIsTheCdf) {
    const double T = 1.1, x0 = 0.8, delta = 0.4;
    for (double xT : {0.2, 0.9, 2.7}) {
        const double absolutely_continuous = testsupport::integrate_endpoint_singular(
            [&](double x) { return density_norm_decreasing(x, T, x0, delta); }, 0.0, xT);
        EXPECT_NEAR(absorption_probability(T, x0, delta) + absolutely_continuous, cdf_absorbing(xT, T, x0, delta), 1e-9);
    }
}

TEST(TailIntegralSchroder, MatchesQuadrature) {
    // mpmath quadrature.
    EXPECT_NEAR(tail_integral_schroder(0.7, 1.2, 0.9, 0.3), 0.30691595411096835, 1e-12);
    for (double delta : {-0.5, 0.3, 1.7}) {
        for (double lower : {0.05, 0.5, 2.0, 8.0}) {
            const double quad = testsupport::integrate(
                [&](double x) { return density_norm_decreasing(x, 1.2, 0.9, delta); }, lower,
                std::numeric_limits<double>::infinity());
            EXPECT_NEAR(tail_integral_schroder(lower, 1.2, 0.9, delta), quad, 1e-8) << delta << " " << lower;
        }
    }
    EXPECT_EQ(tail_integral_schroder(std::numeric_limits<double>::infinity(), 1.2, 0.9, 0.3), 0.0);
    EXPECT_LT(tail_integral_schroder(500.0, 1.2, 0.9, 0.3), 1e-40);
}

TEST(TransitionCdf, DispatchesOnBoundary) {
    EXPECT_DOUBLE_EQ(transition_cdf({0.5, 1.0, Boundary::Absorbing}, 0.7, 2.0), cdf_absorbing(0.7, 2.0, 1.0, 0.5));
    EXPECT_DOUBLE_EQ(transition_cdf({0.5, 1.0, Boundary::Reflecting}, 0.7, 2.0), cdf_reflecting(0.7, 2.0, 1.0, 0.5));
    EXPECT_DOUBLE_EQ(transition_cdf({3.0, 1.0, Boundary::None}, 0.7, 2.0), cdf_reflecting(0.7, 2.0, 1.0, 3.0));
    EXPECT_THROW(transition_cdf({3.0, 1.0, Boundary::Reflecting}, 0.7, 2.0), DomainError);
    EXPECT_THROW(transition_cdf({1.0, 1.0, Boundary::None}, 0.7, 2.0), DomainError);
    EXPECT_THROW(transition_cdf({2.5, 1.0, Boundary::Absorbing}, 0.7, 2.0), DomainError);
    EXPECT_THROW(transition_cdf({-1.0, 1.0, Boundary::Reflecting}, 0.7, 2.0), DomainError);
}

TEST(CirTimeChange, ClosedFormCases) {
    const CirParams p{0.8, 0.05, 0.3, 0.04};
    const TimeChange zero = cir_time_change(p, 0.0);
    EXPECT_EQ(zero.phi, 0.0);
    EXPECT_EQ(zero.scale, 1.0);
    EXPECT_DOUBLE_EQ(zero.delta, 4.0 * 0.8 * 0.05 / 0.09);
    const TimeChange unit = cir_time_change({1.0, 1.0, 2.0, 1.0}, std::log(2.0));
    EXPECT_NEAR(unit.phi, 1.0, 1e-15);
    EXPECT_NEAR(unit.scale, 0.5, 1e-15);
    EXPECT_THROW(cir_time_change({0.0, 1.0, 1.0, 1.0}, 1.0), DomainError);
    EXPECT_THROW(cir_time_change(p, -1.0), DomainError);
}

TEST(CirTimeChange, MeanFromMappedDensity) {
    for (const CirParams& p : {CirParams{0.8, 0.05, 0.3, 0.04}, CirParams{2.0, 0.3, 0.5, 0.1}}) {
        for (double t : {0.25, 1.0, 4.0}) {
            const TimeChange tc = cir_time_change(p, t);
            const double mean_besq = total_mass(
                [&](double x) { return x * density_reflecting(x, tc.phi, p.s0, tc.delta); }, p.s0 + tc.delta * tc.phi);
            EXPECT_NEAR(tc.scale * mean_besq, p.theta + (p.s0 - p.theta) * std::exp(-p.kappa * t), 1e-10);
        }
    }
}

TEST(PowerLocalMartingale, StrictlyBelowStartValue) {
    // mpmath quadrature of X^{-1/2} against the dimension-3 density.
    EXPECT_NEAR(power_local_martingale_expectation(1.0, 1.0, 3.0), 0.6826894921370859, 1e-12);
    for (double delta : {2.2, 3.0, 3.4, 6.0}) {
        const double start = std::pow(1.7, 1.0 - 0.5 * delta);
        // The deficit is P(chi2_{delta-2} > x0/T); below T ~ 0.03 it drops
        // under double epsilon, so the strict check starts at 0.05.
        for (double T : {0.05, 0.1, 1.0, 10.0, 100.0}) {
            const double ratio = power_local_martingale_expectation(1.7, T, delta) / start;
            EXPECT_LT(ratio, 1.0) << delta << " " << T;
            EXPECT_GT(ratio, 0.0);
        }
        EXPECT_NEAR(power_local_martingale_expectation(1.7, 1e-6, delta), start, 1e-12 * start);
    }
    EXPECT_THROW(power_local_martingale_expectation(1.0, 1.0, 2.0), DomainError);
    EXPECT_THROW(power_local_martingale_expectation(1.0, 1.0, 1.5), DomainError);
}

TEST(PowerLocalMartingale, MatchesQuadrature) {
    for (double delta : {2.5, 3.4}) {
        const double quad = total_mass(
            [&](double x) { return std::pow(x, 1.0 - 0.5 * delta) * density_reflecting(x, 2.0, 1.2, delta); }, 1.0);
        EXPECT_NEAR(power_local_martingale_expectation(1.2, 2.0, delta), quad, 1e-9);
    }
}
