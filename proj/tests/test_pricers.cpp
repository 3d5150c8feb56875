#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "benchpricer/analytic.hpp"
#include "benchpricer/errors.hpp"
#include "benchpricer/pricers.hpp"
#include "benchpricer/quantize.hpp"

using namespace benchpricer;

namespace {

constexpr double kRate = 0.05;

const QuantGrid& euler_grid() {
    static const QuantGrid grid = rmq_build(tcev_surrogate(TcevParams{}, SchemeOrder::Euler), 50.0, 15.0, 24, 50);
    return grid;
}

const QuantGrid& monthly_grid() {
    static const QuantGrid grid = rmq_build(tcev_surrogate(TcevParams{}, SchemeOrder::Euler), 50.0, 5.0, 12, 60);
    return grid;
}

const JointQuantGrid& hybrid_grid() {
    static const JointQuantGrid grid =
        joint_rmq_build(Rate32Params{}, TcevParams{}, SchemeOrder::HigherOrder, 0.0, 10.0, 12, 30, 80);
    return grid;
}

std::vector<double> monthly_dates(double first, double last) {
    std::vector<double> dates;
    for (int m = static_cast<int>(std::lround(first * 12)); m <= std::lround(last * 12); ++m) dates.push_back(m / 12.0);
    return dates;
}

}  // namespace

TEST(EuropeanRmq, NumerairePayoffReturnsInitialValue) {
    const QuantGrid& g = euler_grid();
    for (double T : {1.0, 7.5, 15.0})
        EXPECT_NEAR(european_price_rmq(g, kRate, T, [](double s) { return s; }), 50.0, 1e-12);
}

TEST(EuropeanRmq, ZeroStrikePutIsWorthless) {
    EXPECT_EQ(european_price_rmq(euler_grid(), kRate, {0.0, 10.0, 0.0, OptionKind::Put}), 0.0);
}

TEST(EuropeanRmq, CallSurfaceNearAnalytic) {
    const TcevParams p;
    for (double T : {10.0, 15.0})
        for (double m : {0.8, 1.0, 1.2}) {
            const EuropeanSpec spec{0.0, T, m * p.x0, OptionKind::Call};
            const double exact = real_world_call(p, kRate, spec);
            EXPECT_NEAR(european_price_rmq(euler_grid(), kRate, spec) / exact, 1.0, 1e-2) << T << " " << m;
        }
}

TEST(EuropeanRmq, ParityOnGrid) {
    const QuantGrid& g = euler_grid();
    const double bond = european_price_rmq(g, kRate, 12.0, [](double) { return 1.0; });
    for (double K : {30.0, 50.0, 80.0}) {
        const double call = european_price_rmq(g, kRate, {0.0, 12.0, K, OptionKind::Call});
        const double put = european_price_rmq(g, kRate, {0.0, 12.0, K, OptionKind::Put});
        EXPECT_NEAR(call - put, 50.0 - K * bond, 1e-11);
    }
}

TEST(EuropeanRmq, RejectsForwardStart) {
    EXPECT_THROW(european_price_rmq(euler_grid(), kRate, {1.0, 10.0, 50.0, OptionKind::Put}), DomainError);
}

TEST(BermudanRmq, SingleDateIsEuropean) {
    const QuantGrid& g = monthly_grid();
    for (double K : {40.0, 50.0, 60.0}) {
        const double bermudan = bermudan_price_rmq(g, kRate, {{5.0}, K, OptionKind::Put});
        const double european = european_price_rmq(g, kRate, {0.0, 5.0, K, OptionKind::Put});
        EXPECT_NEAR(bermudan, european, 1e-12 * european);
    }
}

TEST(BermudanRmq, MoreDatesNeverLowerThePrice) {
    const QuantGrid& g = monthly_grid();
    for (double K : {45.0, 55.0}) {
        const double european = european_price_rmq(g, kRate, {0.0, 5.0, K, OptionKind::Put});
        const double yearly = bermudan_price_rmq(g, kRate, {{1, 2, 3, 4, 5}, K, OptionKind::Put});
        const double quarterly =
            bermudan_price_rmq(g, kRate, {{0.25, 0.5, 0.75, 1, 1.25, 1.5, 1.75, 2, 2.25, 2.5, 2.75, 3, 3.25, 3.5,
                                           3.75, 4, 4.25, 4.5, 4.75, 5},
                                          K, OptionKind::Put});
        const double monthly = bermudan_price_rmq(g, kRate, {monthly_dates(1.0 / 12, 5.0), K, OptionKind::Put});
        EXPECT_GE(yearly, european);
        EXPECT_GE(quarterly, yearly);
        EXPECT_GE(monthly, quarterly);
        EXPECT_GT(monthly, european * 1.001);
    }
}

TEST(BermudanRmq, ImmediateExercisePremiumIsBounded) {
    // deep put, monthly exercise: never below the one-month European
    const QuantGrid& g = monthly_grid();
    const double K = 80.0;
    const double price = bermudan_price_rmq(g, kRate, {monthly_dates(1.0 / 12, 5.0), K, OptionKind::Put});
    const double first = european_price_rmq(g, kRate, {0.0, 1.0 / 12, K, OptionKind::Put});
    EXPECT_GE(price, first);
}

TEST(BermudanRmq, RejectsOffGridOrUnorderedDates) {
    const QuantGrid& g = monthly_grid();
    EXPECT_THROW(bermudan_price_rmq(g, kRate, {{0.51}, 50.0, OptionKind::Put}), DomainError);
    EXPECT_THROW(bermudan_price_rmq(g, kRate, {{2.0, 1.0}, 50.0, OptionKind::Put}), DomainError);
    EXPECT_THROW(bermudan_price_rmq(g, kRate, {{}, 50.0, OptionKind::Put}), DomainError);
    EXPECT_THROW(bermudan_price_rmq(g, kRate, {{6.0}, 50.0, OptionKind::Put}), DomainError);
}

TEST(HybridRmq, ZeroRateReducesToGopGrid) {
    const TcevParams p;
    const GaussianSurrogate still_rate =
        euler_surrogate([](double, double) { return CoefficientJet{0, 0, 0, 0, 1e-6, 0, 0, 0}; });
    const GaussianSurrogate gop = tcev_surrogate(p, SchemeOrder::HigherOrder);
    const JointQuantGrid g = joint_rmq_build(still_rate, 0.0, gop, p.x0, 0.0, 10.0, 12, 1, 200);
    for (double T : {2.0, 5.0, 10.0}) {
        const double hybrid = hybrid_zcb_rmq(g, T);
        EXPECT_NEAR(hybrid, european_price_rmq(g.gop, 0.0, T, [](double) { return 1.0; }), 1e-12);
        EXPECT_NEAR(hybrid / mpor_component(p, 0.0, T), 1.0, 2e-3) << T;
    }
}

TEST(HybridRmq, CurveMatchesPointPrices) {
    const JointQuantGrid& g = hybrid_grid();
    const std::vector<double> curve = hybrid_zcb_curve_rmq(g);
    ASSERT_EQ(curve.size(), g.steps() + 1);
    EXPECT_DOUBLE_EQ(curve[0], 1.0);
    for (std::size_t k = 6; k < curve.size(); k += 17) EXPECT_DOUBLE_EQ(curve[k], hybrid_zcb_rmq(g, g.times()[k]));
    for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_LT(curve[k], curve[k - 1]);
}

TEST(HybridRmq, ErrorShrinksUnderJointRefinement) {
    const TcevParams p;
    const Rate32Params pr;
    int spy = 3, n_rate = 6, n_gop = 12;
    double previous = 0.0;
    for (int level = 0; level < 4; ++level, spy *= 2, n_rate *= 2, n_gop *= 2) {
        const JointQuantGrid g = joint_rmq_build(pr, p, SchemeOrder::Euler, 0.0, 15.0, spy, n_rate, n_gop);
        double worst = 0.0;
        for (int year = 1; year <= 15; ++year)
            worst = std::max(worst, std::abs(hybrid_zcb_rmq(g, year) / hybrid_zcb(p, pr, 0.0, year) - 1.0));
        if (level > 0) EXPECT_GE(previous / worst, 1.5) << "level " << level;
        previous = worst;
    }
}

TEST(BondOptionRmq, ZeroStrikePutIsWorthless) {
    EXPECT_EQ(zcb_option_price_rmq(hybrid_grid(), Rate32Params{}, TcevParams{}, {5.0, 10.0, 0.0, OptionKind::Put}),
              0.0);
}

TEST(BondOptionRmq, PutIsMonotoneAndConvexInStrike) {
    const JointQuantGrid& g = hybrid_grid();
    std::vector<double> prices;
    for (int k = 0; k < 20; ++k)
        prices.push_back(
            zcb_option_price_rmq(g, Rate32Params{}, TcevParams{}, {5.0, 10.0, 0.3 + 0.025 * k, OptionKind::Put}));
    for (std::size_t k = 1; k < prices.size(); ++k) EXPECT_GE(prices[k], prices[k - 1]);
    for (std::size_t k = 2; k < prices.size(); ++k)
        EXPECT_GE(prices[k] - 2 * prices[k - 1] + prices[k - 2], -1e-14);
    // slope is bounded by the hybrid bond to the expiry
    EXPECT_LE(prices.back() - prices[prices.size() - 2], 0.025 * hybrid_zcb_rmq(g, 5.0) + 1e-14);
}

TEST(BondOptionRmq, ParityOnGrid) {
    const JointQuantGrid& g = hybrid_grid();
    const Rate32Params pr;
    const TcevParams p;
    const double forward = zcb_option_price_rmq(g, pr, p, {5.0, 10.0, 0.0, OptionKind::Call});
    const double bond = hybrid_zcb_rmq(g, 5.0);
    for (double K : {0.4, 0.55, 0.7}) {
        const double call = zcb_option_price_rmq(g, pr, p, {5.0, 10.0, K, OptionKind::Call});
        const double put = zcb_option_price_rmq(g, pr, p, {5.0, 10.0, K, OptionKind::Put});
        EXPECT_NEAR(call - put, forward - K * bond, 1e-13);
    }
    // the zero-strike call is the bond maturing at S priced through M G at the expiry; on this coarse
    // grid it sits about 1% above the direct curve value
    EXPECT_NEAR(forward / hybrid_zcb_rmq(g, 10.0), 1.0, 2e-2);
}

TEST(BondOptionRmq, RejectsBadSpec) {
    const JointQuantGrid& g = hybrid_grid();
    EXPECT_THROW(zcb_option_price_rmq(g, Rate32Params{}, TcevParams{}, {5.0, 5.0, 0.5, OptionKind::Put}), DomainError);
    EXPECT_THROW(zcb_option_price_rmq(g, Rate32Params{}, TcevParams{}, {5.0, 10.0, -0.1, OptionKind::Put}),
                 DomainError);
}

TEST(BondOptionRmq, ClassicalComparatorsOrdering) {
    const JointQuantGrid& g = hybrid_grid();
    const Rate32Params pr;
    const TcevParams p;
    for (double K : {0.4, 0.5, 0.6, 0.7}) {
        const BondOptionComparison c = rn_bond_option_comparators(g, pr, p, 5.0, 10.0, K);
        EXPECT_GT(c.rw_put, c.rn_put) << K;
        EXPECT_LT(c.rw_call, c.rn_call) << K;
        EXPECT_DOUBLE_EQ(c.rw_put, zcb_option_price_rmq(g, pr, p, {5.0, 10.0, K, OptionKind::Put}));
    }
}

TEST(BondOptionRmq, ComparatorsAgreeWithoutGopNoise) {
    TcevParams quiet;
    quiet.c = 1e-4;
    const Rate32Params pr;
    const JointQuantGrid g = joint_rmq_build(pr, quiet, SchemeOrder::HigherOrder, 0.0, 6.0, 12, 30, 20);
    for (double K : {0.5, 0.7}) {
        const BondOptionComparison c = rn_bond_option_comparators(g, pr, quiet, 5.0, 6.0, K);
        EXPECT_NEAR(c.rw_put, c.rn_put, 1e-3 * std::max(c.rn_put, 1e-3)) << K;
        EXPECT_NEAR(c.rw_call, c.rn_call, 1e-3 * c.rn_call) << K;
    }
}
