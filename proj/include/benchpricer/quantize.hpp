#pragma once

// Recursive marginal quantization. Each time step replaces the law of the
// next state by a Gaussian mixture (one component per current codeword),
// fits an L2-optimal grid to that mixture, and records the companion
// probabilities and the one-step transition matrix.

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <limits>
#include <vector>

#include "benchpricer/models.hpp"

namespace benchpricer {

enum class SchemeOrder { Euler, HigherOrder };

/// Drift a and diffusion b of a scalar SDE with the partial derivatives the
/// second-order scheme needs.
struct CoefficientJet {
    double a, a_x, a_xx, a_t;
    double b, b_x, b_xx, b_t;
};

using JetFunction = std::function<CoefficientJet(double x, double t)>;

/// One-step conditional law X_{t+dt} | X_t = x ~ Normal(mean_fn, var_fn).
struct GaussianSurrogate {
    std::function<double(double x, double t, double dt)> mean_fn;
    std::function<double(double x, double t, double dt)> var_fn;
    SchemeOrder order = SchemeOrder::Euler;
    /// Codewords are clamped to this floor after each optimizer step.
    double floor = -std::numeric_limits<double>::infinity();
};

/// mean x + a dt, variance b^2 dt.
GaussianSurrogate euler_surrogate(JetFunction jet, double floor = -std::numeric_limits<double>::infinity());

/// Moment-matched Gaussian of the simplified weak order 2.0 Taylor step
///   x + m0 + c1 Z + c2 (Z^2 - 1),
/// m0 = a dt + (a_t + a a_x + a_xx b^2 / 2) dt^2 / 2,
/// c1 = b sqrt(dt) + (a_x b + a b_x + b^2 b_xx / 2 + b_t) dt^{3/2} / 2,
/// c2 = b b_x dt / 2; mean x + m0 and variance c1^2 + 2 c2^2.
GaussianSurrogate higher_order_surrogate(JetFunction jet, double floor = -std::numeric_limits<double>::infinity());

JetFunction tcev_jet(const TcevParams& p);
JetFunction rate32_jet(const Rate32Params& p);

/// Positivity floor applied to TCEV and 3/2 codewords.
inline constexpr double kPositiveFloor = 1e-10;

GaussianSurrogate tcev_surrogate(const TcevParams& p, SchemeOrder order);
GaussianSurrogate rate32_surrogate(const Rate32Params& p, SchemeOrder order);

/// sum_i weights[i] * Normal(means[i], stddevs[i]^2).
struct Mixture {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> stddevs;

    double mean() const;
    double stddev() const;
    std::size_t size() const { return weights.size(); }
};

/// Mixture for the next marginal given the current codewords and probabilities.
Mixture mixture_moments(const std::vector<double>& codewords, const std::vector<double>& probs,
                        const GaussianSurrogate& surrogate, double t, double dt);

/// sum_i w_i E[min_j (Z_i - gamma_j)^2].
double distortion(const Mixture& mixture, const std::vector<double>& codewords);

/// Partial derivatives of distortion with respect to each codeword.
std::vector<double> distortion_gradient(const Mixture& mixture, const std::vector<double>& codewords);

struct OptimizerOptions {
    int max_iterations = 200;
    /// Stop when the gradient sup-norm is at most this times the mixture stddev.
    /// A codeword resting on the floor whose gradient points downward is
    /// excluded from the norm and held fixed.
    double relative_tolerance = 1e-9;
    double floor = -std::numeric_limits<double>::infinity();
    /// Called once per iteration with (iteration, distortion, gradient sup-norm).
    std::function<void(int, double, double)> on_iteration;
};

/// Stationary N-point grid for the mixture. Damped Newton on the distortion
/// with its exact tridiagonal Hessian, backtracking so distortion never rises
/// and the grid stays increasing; Lloyd's fixed point when Newton fails.
/// Throws QuantizationError if the tolerance is not reached.
std::vector<double> optimize_codewords(const Mixture& mixture, int N, std::vector<double> init,
                                       const OptimizerOptions& options = {});

/// Mixture mass of each Voronoi cell.
std::vector<double> companion_probs(const Mixture& mixture, const std::vector<double>& codewords);

/// Row i holds the surrogate probabilities of moving from prev_codewords[i]
/// into each Voronoi cell of next_codewords.
Eigen::MatrixXd transition_matrix(const std::vector<double>& prev_codewords, const GaussianSurrogate& surrogate,
                                  const std::vector<double>& next_codewords, double t, double dt);

/// Voronoi cell boundaries of a sorted grid, including -inf and +inf.
std::vector<double> voronoi_edges(const std::vector<double>& codewords);

struct QuantGrid {
    std::vector<double> times;
    std::vector<std::vector<double>> codewords;
    std::vector<std::vector<double>> probs;
    /// trans[k] maps step k to step k + 1; size codewords[k] x codewords[k + 1].
    std::vector<Eigen::MatrixXd> trans;

    std::size_t steps() const { return times.size() - 1; }
    /// Index of the step whose time equals t within 1e-9, or throws.
    std::size_t step_at(double t) const;
    double expectation(std::size_t step, const std::function<double(double)>& f) const;
    void validate() const;
};

struct RmqOptions {
    OptimizerOptions optimizer;
    /// Called after each completed step with (step, time).
    std::function<void(std::size_t, double)> on_step;
};

/// Grid from x0 at time 0 to T with steps_per_year steps per year
/// (ceil(T * steps_per_year) steps of equal length) and N codewords after
/// the one-point step 0.
QuantGrid rmq_build(const GaussianSurrogate& surrogate, double x0, double T, int steps_per_year, int N,
                    const RmqOptions& options = {});

/// One CSV per step, step_<k>.csv with columns codeword, probability,
/// t_0 ... t_{M-1}: the transition row into the next step (absent on the
/// final step).
void write_grid_csv(const QuantGrid& grid, const std::filesystem::path& directory);

/// Two-factor grid for (r, X̄): independent marginal RMQ grids, coupled by
/// the correlation rho of the driving Brownian motions in the transitions.
struct JointQuantGrid {
    QuantGrid rate;
    QuantGrid gop;
    GaussianSurrogate rate_surrogate;
    GaussianSurrogate gop_surrogate;
    double rho = 0.0;
    /// Marginal transition mass below this is dropped from a row's support.
    double truncation = 1e-13;
    /// joint_probs[k](i, j) = P(r_k = rate codeword i, X̄_k = gop codeword j).
    std::vector<Eigen::MatrixXd> joint_probs;
    /// state_prices[k](i, j) = E[exp(-sum_{l<k} r_l dt) 1{node (i, j) at step k}],
    /// rate accrued at the left endpoint of each step.
    std::vector<Eigen::MatrixXd> state_prices;

    std::size_t steps() const { return rate.steps(); }
    const std::vector<double>& times() const { return rate.times; }
};

/// Block of a joint transition row: probabilities into target cells
/// [rate_begin, rate_begin + probs.rows()) x [gop_begin, gop_begin + probs.cols()).
/// Target cells outside the block carry less than the truncation threshold,
/// which is folded into the block's edge cells so the block sums to 1.
struct JointTransitionBlock {
    std::size_t rate_begin = 0;
    std::size_t gop_begin = 0;
    Eigen::MatrixXd probs;
};

/// Transition out of node (i, j) at step k of a joint grid.
JointTransitionBlock joint_transition(const JointQuantGrid& grid, std::size_t k, std::size_t i, std::size_t j);

struct JointRmqOptions {
    RmqOptions marginal;
    double truncation = 1e-13;
    /// Refines the common-factor quadrature used by the correlated forward
    /// pass; 1 gives agreement with exact bivariate rectangles near 1e-12.
    double factor_nodes_scale = 1.0;
};

JointQuantGrid joint_rmq_build(const Rate32Params& p_rate, const TcevParams& p_tcev, SchemeOrder order, double rho,
                               double T, int steps_per_year, int N_rate, int N_gop,
                               const JointRmqOptions& options = {});

/// Generic form taking the two surrogates and start values directly.
JointQuantGrid joint_rmq_build(const GaussianSurrogate& rate_surrogate, double r0,
                               const GaussianSurrogate& gop_surrogate, double x0, double rho, double T,
                               int steps_per_year, int N_rate, int N_gop, const JointRmqOptions& options = {});

/// E[exp(-sum r_l dt) * terminal(i, j)] at step 0 by backward recursion over
/// explicit joint transitions. Quadratic in the product grid size; kept to
/// verify the forward state prices on small grids.
double joint_backward_expectation(const JointQuantGrid& grid, std::size_t step, const Eigen::MatrixXd& terminal,
                                  bool discount);

}  // namespace benchpricer
