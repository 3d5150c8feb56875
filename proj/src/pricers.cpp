#include "benchpricer/pricers.hpp"

#include <algorithm>
#include <cmath>

#include "benchpricer/errors.hpp"

namespace benchpricer {
namespace {

using detail::require;

double vanilla(OptionKind kind, double K, double s) {
    return kind == OptionKind::Put ? std::max(K - s, 0.0) : std::max(s - K, 0.0);
}

// Bond price layers at expiry: M per GOP codeword and G per rate codeword.
struct BondLayers {
    std::vector<double> mpor;
    std::vector<double> ir;
};

BondLayers bond_layers(const JointQuantGrid& grid, std::size_t step, const Rate32Params& p_rate,
                       const TcevParams& p_tcev, double T, double S) {
    BondLayers out;
    for (double x : grid.gop.codewords[step]) out.mpor.push_back(mpor_component(p_tcev, T, S, x));
    for (double r : grid.rate.codewords[step]) out.ir.push_back(ir_component_32(p_rate, T, S, r));
    return out;
}

// sum_ij Q(i, j) (x0 / x_j) f(i, j) at a joint step.
template <class F>
double benchmarked_sum(const JointQuantGrid& grid, std::size_t step, F f) {
    const Eigen::MatrixXd& prices = grid.state_prices[step];
    const double x0 = grid.gop.codewords[0][0];
    double total = 0.0;
    for (Eigen::Index j = 0; j < prices.cols(); ++j) {
        double column = 0.0;
        for (Eigen::Index i = 0; i < prices.rows(); ++i) column += prices(i, j) * f(i, j);
        total += column * x0 / grid.gop.codewords[step][j];
    }
    return total;
}

}  // namespace

void BermudanSpec::validate() const {
    require(!exercise_times.empty(), "BermudanSpec: no exercise times");
    require(exercise_times.front() > 0.0, "BermudanSpec: exercise times must be positive");
    for (std::size_t k = 1; k < exercise_times.size(); ++k)
        require(exercise_times[k] > exercise_times[k - 1], "BermudanSpec: exercise times must increase");
    require(K >= 0.0 && std::isfinite(K), "BermudanSpec: strike must be nonnegative");
}

void BondOptionSpec::validate() const {
    require(T > 0.0 && S > T && std::isfinite(S), "BondOptionSpec: need 0 < T < S");
    require(K >= 0.0 && std::isfinite(K), "BondOptionSpec: strike must be nonnegative");
}

double european_price_rmq(const QuantGrid& grid, double r, double T, const std::function<double(double)>& payoff) {
    const std::size_t step = grid.step_at(T);
    const double beta = std::exp(r * T);
    const double s0 = grid.codewords[0][0];
    double total = 0.0;
    for (std::size_t j = 0; j < grid.codewords[step].size(); ++j) {
        const double gop = beta * grid.codewords[step][j];
        total += grid.probs[step][j] * payoff(gop) / gop;
    }
    return s0 * total;
}

double european_price_rmq(const QuantGrid& grid, double r, const EuropeanSpec& spec) {
    spec.validate();
    require(spec.t == 0.0, "european_price_rmq: grids start at time 0");
    return european_price_rmq(grid, r, spec.T, [&](double s) { return vanilla(spec.kind, spec.K, s); });
}

double bermudan_price_rmq(const QuantGrid& grid, double r, const BermudanSpec& spec) {
    spec.validate();
    std::vector<bool> exercisable(grid.times.size(), false);
    for (double t : spec.exercise_times) exercisable[grid.step_at(t)] = true;
    const std::size_t last = grid.step_at(spec.exercise_times.back());

    auto benchmarked_exercise = [&](std::size_t k, std::size_t j) {
        const double gop = std::exp(r * grid.times[k]) * grid.codewords[k][j];
        return vanilla(spec.kind, spec.K, gop) / gop;
    };
    Eigen::VectorXd value(grid.codewords[last].size());
    for (Eigen::Index j = 0; j < value.size(); ++j) value(j) = benchmarked_exercise(last, j);
    for (std::size_t k = last; k-- > 0;) {
        Eigen::VectorXd previous = grid.trans[k] * value;
        if (exercisable[k])
            for (Eigen::Index j = 0; j < previous.size(); ++j)
                previous(j) = std::max(previous(j), benchmarked_exercise(k, j));
        value = std::move(previous);
    }
    return grid.codewords[0][0] * value(0);
}

double hybrid_zcb_rmq(const JointQuantGrid& grid, double T) {
    const std::size_t step = grid.rate.step_at(T);
    return benchmarked_sum(grid, step, [](Eigen::Index, Eigen::Index) { return 1.0; });
}

std::vector<double> hybrid_zcb_curve_rmq(const JointQuantGrid& grid) {
    std::vector<double> curve;
    for (std::size_t k = 0; k <= grid.steps(); ++k)
        curve.push_back(benchmarked_sum(grid, k, [](Eigen::Index, Eigen::Index) { return 1.0; }));
    return curve;
}

double zcb_option_price_rmq(const JointQuantGrid& grid, const Rate32Params& p_rate, const TcevParams& p_tcev,
                            const BondOptionSpec& spec) {
    spec.validate();
    const std::size_t step = grid.rate.step_at(spec.T);
    const BondLayers bond = bond_layers(grid, step, p_rate, p_tcev, spec.T, spec.S);
    return benchmarked_sum(grid, step, [&](Eigen::Index i, Eigen::Index j) {
        return vanilla(spec.kind, spec.K, bond.mpor[j] * bond.ir[i]);
    });
}

BondOptionComparison rn_bond_option_comparators(const JointQuantGrid& grid, const Rate32Params& p_rate,
                                                const TcevParams& p_tcev, double T, double S, double K) {
    BondOptionSpec spec{T, S, K, OptionKind::Put};
    spec.validate();
    const std::size_t step = grid.rate.step_at(T);
    const BondLayers bond = bond_layers(grid, step, p_rate, p_tcev, T, S);
    BondOptionComparison out{};
    out.rw_put = benchmarked_sum(grid, step, [&](Eigen::Index i, Eigen::Index j) {
        return vanilla(OptionKind::Put, K, bond.mpor[j] * bond.ir[i]);
    });
    out.rw_call = benchmarked_sum(grid, step, [&](Eigen::Index i, Eigen::Index j) {
        return vanilla(OptionKind::Call, K, bond.mpor[j] * bond.ir[i]);
    });
    // Classical: discount by exp(-int r) alone, so the GOP coordinate is summed out.
    const Eigen::VectorXd rate_prices = grid.state_prices[step].rowwise().sum();
    out.rn_put = 0.0;
    out.rn_call = 0.0;
    for (Eigen::Index i = 0; i < rate_prices.size(); ++i) {
        out.rn_put += rate_prices(i) * vanilla(OptionKind::Put, K, bond.ir[i]);
        out.rn_call += rate_prices(i) * vanilla(OptionKind::Call, K, bond.ir[i]);
    }
    return out;
}

}  // namespace benchpricer
