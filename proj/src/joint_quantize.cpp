#include <algorithm>
#include <cmath>
#include <limits>

#include "benchpricer/errors.hpp"
#include "benchpricer/quantize.hpp"
#include "benchpricer/specfun.hpp"

namespace benchpricer {
namespace {

using detail::require;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Support of a marginal transition row and the standardized cell edges over
// it, with the outermost edges pushed to infinity.
struct MarginalSupport {
    std::size_t begin = 0;
    std::vector<double> z;  // size = support length + 1

    std::size_t size() const { return z.size() - 1; }
};

MarginalSupport support_of(const QuantGrid& grid, const GaussianSurrogate& surrogate, std::size_t k, std::size_t i,
                           double truncation) {
    const auto row = grid.trans[k].row(i);
    Eigen::Index first = 0, last = row.size() - 1;
    while (first < last && row(first) < truncation) ++first;
    while (last > first && row(last) < truncation) --last;

    const double t = grid.times[k];
    const double dt = grid.times[k + 1] - t;
    const double x = grid.codewords[k][i];
    const double mean = surrogate.mean_fn(x, t, dt);
    const double sd = std::sqrt(surrogate.var_fn(x, t, dt));
    const std::vector<double>& next = grid.codewords[k + 1];

    MarginalSupport s;
    s.begin = static_cast<std::size_t>(first);
    const std::size_t cells = static_cast<std::size_t>(last - first + 1);
    s.z.resize(cells + 1);
    s.z.front() = -kInf;
    s.z.back() = kInf;
    for (std::size_t c = 1; c < cells; ++c) {
        const std::size_t j = s.begin + c;
        s.z[c] = (0.5 * (next[j - 1] + next[j]) - mean) / sd;
    }
    return s;
}

std::vector<double> cell_probs(const MarginalSupport& s) {
    std::vector<double> p(s.size());
    double total = 0.0;
    for (std::size_t c = 0; c < s.size(); ++c) total += p[c] = specfun::normal_cdf_diff(s.z[c], s.z[c + 1]);
    for (double& v : p) v /= total;
    return p;
}

JointTransitionBlock block_for(const JointQuantGrid& grid, std::size_t k, std::size_t i, std::size_t j) {
    const MarginalSupport rs = support_of(grid.rate, grid.rate_surrogate, k, i, grid.truncation);
    const MarginalSupport gs = support_of(grid.gop, grid.gop_surrogate, k, j, grid.truncation);
    JointTransitionBlock block;
    block.rate_begin = rs.begin;
    block.gop_begin = gs.begin;
    if (grid.rho == 0.0) {
        const std::vector<double> pr = cell_probs(rs);
        const std::vector<double> pg = cell_probs(gs);
        block.probs = Eigen::Map<const Eigen::VectorXd>(pr.data(), pr.size()) *
                      Eigen::Map<const Eigen::RowVectorXd>(pg.data(), pg.size());
        return block;
    }
    // Corner values of the bivariate normal CDF, then rectangle differences.
    const std::size_t nr = rs.size(), ng = gs.size();
    Eigen::MatrixXd corners(nr + 1, ng + 1);
    for (std::size_t a = 0; a <= nr; ++a)
        for (std::size_t b = 0; b <= ng; ++b) corners(a, b) = specfun::bivariate_normal_cdf(rs.z[a], gs.z[b], grid.rho);
    block.probs.resize(nr, ng);
    for (std::size_t a = 0; a < nr; ++a)
        for (std::size_t b = 0; b < ng; ++b)
            block.probs(a, b) =
                std::max(0.0, corners(a + 1, b + 1) - corners(a, b + 1) - corners(a + 1, b) + corners(a, b));
    block.probs /= block.probs.sum();
    return block;
}

// Standardized next-step Voronoi edges for every current codeword, one row each.
std::vector<std::vector<double>> standardized_edges(const QuantGrid& grid, const GaussianSurrogate& surrogate,
                                                    std::size_t k) {
    const double t = grid.times[k];
    const double dt = grid.times[k + 1] - t;
    const std::vector<double> edges = voronoi_edges(grid.codewords[k + 1]);
    std::vector<std::vector<double>> z(grid.codewords[k].size(), std::vector<double>(edges.size()));
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double x = grid.codewords[k][i];
        const double mean = surrogate.mean_fn(x, t, dt);
        const double sd = std::sqrt(surrogate.var_fn(x, t, dt));
        for (std::size_t e = 0; e < edges.size(); ++e) z[i][e] = (edges[e] - mean) / sd;
    }
    return z;
}

// Nonzero stretch of one conditional transition row.
struct Band {
    std::size_t first = 0;
    std::vector<double> probs;
};

// Cell probabilities of N(shift, scale^2) over standardized edges. Mass
// beyond 9 conditional standard deviations (below 1e-19) goes to the
// outermost cell of the band so each row still sums to 1.
void conditional_bands(const std::vector<std::vector<double>>& z, double shift, double scale, std::vector<Band>& out) {
    constexpr double reach = 9.0;
    out.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const std::vector<double>& row = z[i];
        const std::size_t cells = row.size() - 1;
        // Interior edges inside the reach; cells [first, last] touch them.
        const auto lo = std::upper_bound(row.begin() + 1, row.end() - 1, shift - reach * scale);
        const auto hi = std::lower_bound(lo, row.end() - 1, shift + reach * scale);
        const std::size_t first = static_cast<std::size_t>(lo - row.begin()) - 1;
        const std::size_t last = std::min(cells - 1, static_cast<std::size_t>(hi - row.begin()) - 1);
        Band& band = out[i];
        band.first = first;
        band.probs.resize(last - first + 1);
        double lower = 0.0;
        for (std::size_t c = first; c <= last; ++c) {
            const double upper = c == last ? 1.0 : specfun::normal_cdf((row[c + 1] - shift) / scale);
            band.probs[c - first] = upper - lower;
            lower = upper;
        }
    }
}

// One forward step with correlated drivers. Writing the pair of standard
// normals as Z_r = c F + c' e_1 and Z_x = sign(rho) c F + c' e_2 with
// c = sqrt|rho|, c' = sqrt(1 - |rho|) and F, e_1, e_2 independent, the
// transition factorizes given F. The F-integral uses the trapezoid rule on
// a uniform grid, which converges geometrically for these entire integrands.
void correlated_step(const JointQuantGrid& grid, std::size_t k, const Eigen::MatrixXd& probs,
                     const Eigen::MatrixXd& prices, double nodes_scale, Eigen::MatrixXd& next_probs,
                     Eigen::MatrixXd& next_prices) {
    const double dt = grid.rate.times[k + 1] - grid.rate.times[k];
    const auto rate_edges = standardized_edges(grid.rate, grid.rate_surrogate, k);
    const auto gop_edges = standardized_edges(grid.gop, grid.gop_surrogate, k);
    const double load = std::sqrt(std::abs(grid.rho));
    const double idio = std::sqrt(1.0 - std::abs(grid.rho));
    const double sign = grid.rho > 0.0 ? 1.0 : -1.0;

    // Node spacing follows the width of the conditional cell probabilities in F.
    const double spacing = 0.5 * std::min(1.0, idio / load) / nodes_scale;
    const double half_width = 8.5;
    const int nodes = 2 * static_cast<int>(std::ceil(half_width / spacing)) + 1;
    const double h = 2.0 * half_width / (nodes - 1);
    std::vector<double> weights(nodes);
    double total = 0.0;
    for (int q = 0; q < nodes; ++q) total += weights[q] = specfun::normal_pdf(-half_width + q * h);

    // Rows 0..nr-1 carry probabilities, rows nr..2nr-1 discounted state prices.
    const Eigen::Index nr = probs.rows();
    Eigen::MatrixXd stacked(2 * nr, probs.cols());
    stacked.topRows(nr) = probs;
    for (Eigen::Index i = 0; i < nr; ++i)
        stacked.row(nr + i) = prices.row(i) * std::exp(-grid.rate.codewords[k][i] * dt);

    std::vector<Band> rate_bands, gop_bands;
    Eigen::MatrixXd moved(2 * nr, next_probs.cols());
    for (int q = 0; q < nodes; ++q) {
        const double f = -half_width + q * h;
        const double w = weights[q] / total;
        conditional_bands(rate_edges, load * f, idio, rate_bands);
        conditional_bands(gop_edges, sign * load * f, idio, gop_bands);
        moved.setZero();
        for (Eigen::Index j = 0; j < stacked.cols(); ++j) {
            const Band& band = gop_bands[j];
            for (std::size_t c = 0; c < band.probs.size(); ++c)
                moved.col(band.first + c) += band.probs[c] * stacked.col(j);
        }
        for (Eigen::Index i = 0; i < nr; ++i) {
            const Band& band = rate_bands[i];
            for (std::size_t c = 0; c < band.probs.size(); ++c) {
                const double weight = w * band.probs[c];
                next_probs.row(band.first + c) += weight * moved.row(i);
                next_prices.row(band.first + c) += weight * moved.row(nr + i);
            }
        }
    }
}

}  // namespace

JointTransitionBlock joint_transition(const JointQuantGrid& grid, std::size_t k, std::size_t i, std::size_t j) {
    require(k < grid.steps(), "joint_transition: step out of range");
    require(i < grid.rate.codewords[k].size() && j < grid.gop.codewords[k].size(), "joint_transition: node out of range");
    return block_for(grid, k, i, j);
}

JointQuantGrid joint_rmq_build(const GaussianSurrogate& rate_surrogate, double r0,
                               const GaussianSurrogate& gop_surrogate, double x0, double rho, double T,
                               int steps_per_year, int N_rate, int N_gop, const JointRmqOptions& options) {
    require(std::abs(rho) < 1.0, "joint_rmq_build: |rho| must be below 1");
    require(options.truncation >= 0.0 && options.truncation < 1e-3, "joint_rmq_build: invalid truncation");
    JointQuantGrid grid;
    grid.rate = rmq_build(rate_surrogate, r0, T, steps_per_year, N_rate, options.marginal);
    grid.gop = rmq_build(gop_surrogate, x0, T, steps_per_year, N_gop, options.marginal);
    grid.rate_surrogate = rate_surrogate;
    grid.gop_surrogate = gop_surrogate;
    grid.rho = rho;
    grid.truncation = options.truncation;

    grid.joint_probs.push_back(Eigen::MatrixXd::Ones(1, 1));
    grid.state_prices.push_back(Eigen::MatrixXd::Ones(1, 1));
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        const double dt = grid.rate.times[k + 1] - grid.rate.times[k];
        const Eigen::MatrixXd& probs = grid.joint_probs[k];
        const Eigen::MatrixXd& prices = grid.state_prices[k];
        const auto nr = static_cast<Eigen::Index>(grid.rate.codewords[k + 1].size());
        const auto ng = static_cast<Eigen::Index>(grid.gop.codewords[k + 1].size());
        Eigen::MatrixXd next_probs = Eigen::MatrixXd::Zero(nr, ng);
        Eigen::MatrixXd next_prices = Eigen::MatrixXd::Zero(nr, ng);
        if (rho == 0.0) {
            // Independent coordinates: the joint step is two matrix products.
            Eigen::VectorXd discount(probs.rows());
            for (Eigen::Index i = 0; i < probs.rows(); ++i) discount(i) = std::exp(-grid.rate.codewords[k][i] * dt);
            next_probs = grid.rate.trans[k].transpose() * probs * grid.gop.trans[k];
            next_prices = grid.rate.trans[k].transpose() * (discount.asDiagonal() * prices) * grid.gop.trans[k];
        } else {
            correlated_step(grid, k, probs, prices, options.factor_nodes_scale, next_probs, next_prices);
        }
        next_probs /= next_probs.sum();
        grid.joint_probs.push_back(std::move(next_probs));
        grid.state_prices.push_back(std::move(next_prices));
    }
    return grid;
}

JointQuantGrid joint_rmq_build(const Rate32Params& p_rate, const TcevParams& p_tcev, SchemeOrder order, double rho,
                               double T, int steps_per_year, int N_rate, int N_gop, const JointRmqOptions& options) {
    return joint_rmq_build(rate32_surrogate(p_rate, order), p_rate.r0, tcev_surrogate(p_tcev, order), p_tcev.x0, rho, T,
                           steps_per_year, N_rate, N_gop, options);
}

double joint_backward_expectation(const JointQuantGrid& grid, std::size_t step, const Eigen::MatrixXd& terminal,
                                  bool discount) {
    require(step <= grid.steps(), "joint_backward_expectation: step out of range");
    require(terminal.rows() == static_cast<Eigen::Index>(grid.rate.codewords[step].size()) &&
                terminal.cols() == static_cast<Eigen::Index>(grid.gop.codewords[step].size()),
            "joint_backward_expectation: terminal layer shape mismatch");
    Eigen::MatrixXd values = terminal;
    for (std::size_t k = step; k-- > 0;) {
        const double dt = grid.rate.times[k + 1] - grid.rate.times[k];
        const auto nr = static_cast<Eigen::Index>(grid.rate.codewords[k].size());
        const auto ng = static_cast<Eigen::Index>(grid.gop.codewords[k].size());
        Eigen::MatrixXd previous(nr, ng);
        for (Eigen::Index i = 0; i < nr; ++i) {
            const double factor = discount ? std::exp(-grid.rate.codewords[k][i] * dt) : 1.0;
            for (Eigen::Index j = 0; j < ng; ++j) {
                const JointTransitionBlock b = joint_transition(grid, k, i, j);
                previous(i, j) =
                    factor * (b.probs.array() *
                              values.block(b.rate_begin, b.gop_begin, b.probs.rows(), b.probs.cols()).array())
                                 .sum();
            }
        }
        values = std::move(previous);
    }
    return values(0, 0);
}

}  // namespace benchpricer
