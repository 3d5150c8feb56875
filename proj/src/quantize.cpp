#include "benchpricer/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "benchpricer/errors.hpp"
#include "benchpricer/specfun.hpp"

namespace benchpricer {
namespace {

using detail::require;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-cell sums over mixture components for a fixed grid.
struct CellTerms {
    std::vector<double> mass;          // P_j
    std::vector<double> first_moment;  // integral of z over the cell
    std::vector<double> edge_density;  // mixture density at each interior edge
    double distortion = 0.0;
};

CellTerms cell_terms(const Mixture& mix, const std::vector<double>& grid) {
    const std::size_t n = grid.size();
    const std::vector<double> edges = voronoi_edges(grid);
    CellTerms out;
    out.mass.assign(n, 0.0);
    out.first_moment.assign(n, 0.0);
    out.edge_density.assign(n + 1, 0.0);
    std::vector<double> cdf(n + 1), pdf(n + 1), z(n + 1);
    for (std::size_t i = 0; i < mix.size(); ++i) {
        const double w = mix.weights[i];
        if (w == 0.0) continue;
        const double m = mix.means[i];
        const double s = mix.stddevs[i];
        for (std::size_t e = 0; e <= n; ++e) {
            z[e] = (edges[e] - m) / s;
            cdf[e] = specfun::normal_cdf(z[e]);
            pdf[e] = std::isinf(z[e]) ? 0.0 : specfun::normal_pdf(z[e]);
            out.edge_density[e] += w * pdf[e] / s;
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double p = cdf[j + 1] - cdf[j];
            const double dpdf = pdf[j] - pdf[j + 1];
            const double lo_term = std::isinf(z[j]) ? 0.0 : z[j] * pdf[j];
            const double hi_term = std::isinf(z[j + 1]) ? 0.0 : z[j + 1] * pdf[j + 1];
            const double offset = m - grid[j];
            out.mass[j] += w * p;
            out.first_moment[j] += w * (m * p + s * dpdf);
            out.distortion += w * (offset * offset * p + 2.0 * offset * s * dpdf + s * s * (p + lo_term - hi_term));
        }
    }
    return out;
}

std::vector<double> gradient_from(const CellTerms& terms, const std::vector<double>& grid) {
    std::vector<double> g(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) g[j] = 2.0 * (grid[j] * terms.mass[j] - terms.first_moment[j]);
    return g;
}

// Solves the tridiagonal system (diag, off) x = rhs; false if a pivot is not positive.
// Sup-norm of the gradient with the components that push a codeword sitting
// on the floor further down removed.
double projected_norm(const std::vector<double>& gradient, const std::vector<double>& grid, double floor) {
    double m = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j)
        if (!(grid[j] <= floor && gradient[j] > 0.0)) m = std::max(m, std::abs(gradient[j]));
    return m;
}

bool solve_tridiagonal(std::vector<double> diag, const std::vector<double>& off, std::vector<double> rhs,
                       std::vector<double>& x) {
    const std::size_t n = diag.size();
    for (std::size_t j = 1; j < n; ++j) {
        if (!(diag[j - 1] > 0.0)) return false;
        const double factor = off[j - 1] / diag[j - 1];
        diag[j] -= factor * off[j - 1];
        rhs[j] -= factor * rhs[j - 1];
    }
    if (!(diag[n - 1] > 0.0)) return false;
    x.assign(n, 0.0);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) x[j] = (rhs[j] - off[j] * x[j + 1]) / diag[j];
    return true;
}

bool admissible(const std::vector<double>& grid, double floor) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (!std::isfinite(grid[j]) || grid[j] < floor) return false;
        if (j > 0 && !(grid[j] > grid[j - 1])) return false;
    }
    return true;
}

// Lays the previous standardized grid onto the new mean and spread.
std::vector<double> initial_grid(const std::vector<double>& previous, double prev_mean, double prev_sd,
                                 const Mixture& mix, int N) {
    const double mean = mix.mean();
    const double sd = mix.stddev();
    std::vector<double> grid(N);
    if (static_cast<int>(previous.size()) == N && prev_sd > 0.0) {
        for (int j = 0; j < N; ++j) grid[j] = mean + sd * (previous[j] - prev_mean) / prev_sd;
        if (admissible(grid, -kInf)) return grid;
    }
    if (N == 1) return {mean};
    for (int j = 0; j < N; ++j) grid[j] = mean + sd * (-3.0 + 6.0 * j / (N - 1.0));
    return grid;
}

std::string format_number(double x) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out << std::setprecision(17) << x;
    return out.str();
}

}  // namespace

GaussianSurrogate euler_surrogate(JetFunction jet, double floor) {
    GaussianSurrogate s;
    s.mean_fn = [jet](double x, double t, double dt) { return x + jet(x, t).a * dt; };
    s.var_fn = [jet](double x, double t, double dt) {
        const double b = jet(x, t).b;
        return b * b * dt;
    };
    s.order = SchemeOrder::Euler;
    s.floor = floor;
    return s;
}

GaussianSurrogate higher_order_surrogate(JetFunction jet, double floor) {
    GaussianSurrogate s;
    s.mean_fn = [jet](double x, double t, double dt) {
        const CoefficientJet c = jet(x, t);
        return x + c.a * dt + 0.5 * (c.a_t + c.a * c.a_x + 0.5 * c.a_xx * c.b * c.b) * dt * dt;
    };
    s.var_fn = [jet](double x, double t, double dt) {
        const CoefficientJet c = jet(x, t);
        const double root_dt = std::sqrt(dt);
        const double c1 = c.b * root_dt + 0.5 * (c.a_x * c.b + c.a * c.b_x + 0.5 * c.b * c.b * c.b_xx + c.b_t) * dt * root_dt;
        const double c2 = 0.5 * c.b * c.b_x * dt;
        return c1 * c1 + 2.0 * c2 * c2;
    };
    s.order = SchemeOrder::HigherOrder;
    s.floor = floor;
    return s;
}

JetFunction tcev_jet(const TcevParams& p) {
    p.validate();
    return [p](double x, double t) {
        require(x > 0.0, "tcev_jet: x must be positive");
        const double k = p.a;
        const double drift = tcev_drift(p, x, t);
        const double diffusion = tcev_diffusion(p, x, t);
        CoefficientJet c;
        c.a = drift;
        c.a_x = (2.0 * k - 1.0) * drift / x;
        c.a_xx = (2.0 * k - 1.0) * (2.0 * k - 2.0) * drift / (x * x);
        c.a_t = 2.0 * (1.0 - k) * p.eta * drift;
        c.b = diffusion;
        c.b_x = k * diffusion / x;
        c.b_xx = k * (k - 1.0) * diffusion / (x * x);
        c.b_t = (1.0 - k) * p.eta * diffusion;
        return c;
    };
}

JetFunction rate32_jet(const Rate32Params& p) {
    p.validate();
    return [p](double r, double) {
        require(r > 0.0, "rate32_jet: r must be positive");
        const double root = std::sqrt(r);
        CoefficientJet c;
        c.a = p.kappa * (p.theta * r - r * r);
        c.a_x = p.kappa * (p.theta - 2.0 * r);
        c.a_xx = -2.0 * p.kappa;
        c.a_t = 0.0;
        c.b = p.sigma * r * root;
        c.b_x = 1.5 * p.sigma * root;
        c.b_xx = 0.75 * p.sigma / root;
        c.b_t = 0.0;
        return c;
    };
}

GaussianSurrogate tcev_surrogate(const TcevParams& p, SchemeOrder order) {
    return order == SchemeOrder::Euler ? euler_surrogate(tcev_jet(p), kPositiveFloor)
                                       : higher_order_surrogate(tcev_jet(p), kPositiveFloor);
}

GaussianSurrogate rate32_surrogate(const Rate32Params& p, SchemeOrder order) {
    return order == SchemeOrder::Euler ? euler_surrogate(rate32_jet(p), kPositiveFloor)
                                       : higher_order_surrogate(rate32_jet(p), kPositiveFloor);
}

double Mixture::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += weights[i] * means[i];
    return m;
}

double Mixture::stddev() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        const double d = means[i] - m;
        v += weights[i] * (stddevs[i] * stddevs[i] + d * d);
    }
    return std::sqrt(v);
}

Mixture mixture_moments(const std::vector<double>& codewords, const std::vector<double>& probs,
                        const GaussianSurrogate& surrogate, double t, double dt) {
    require(codewords.size() == probs.size() && !codewords.empty(), "mixture_moments: size mismatch");
    require(dt > 0.0, "mixture_moments: dt must be positive");
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    require(std::abs(total - 1.0) < 1e-9, "mixture_moments: weights must sum to 1");
    Mixture mix;
    mix.weights = probs;
    mix.means.resize(codewords.size());
    mix.stddevs.resize(codewords.size());
    for (std::size_t i = 0; i < codewords.size(); ++i) {
        mix.means[i] = surrogate.mean_fn(codewords[i], t, dt);
        const double var = surrogate.var_fn(codewords[i], t, dt);
        require(var > 0.0 && std::isfinite(var), "mixture_moments: surrogate variance must be positive");
        mix.stddevs[i] = std::sqrt(var);
    }
    return mix;
}

std::vector<double> voronoi_edges(const std::vector<double>& codewords) {
    std::vector<double> edges(codewords.size() + 1);
    edges.front() = -kInf;
    edges.back() = kInf;
    for (std::size_t j = 1; j < codewords.size(); ++j) edges[j] = 0.5 * (codewords[j - 1] + codewords[j]);
    return edges;
}

double distortion(const Mixture& mixture, const std::vector<double>& codewords) {
    require(admissible(codewords, -kInf), "distortion: codewords must be strictly increasing");
    return cell_terms(mixture, codewords).distortion;
}

std::vector<double> distortion_gradient(const Mixture& mixture, const std::vector<double>& codewords) {
    require(admissible(codewords, -kInf), "distortion_gradient: codewords must be strictly increasing");
    return gradient_from(cell_terms(mixture, codewords), codewords);
}

std::vector<double> optimize_codewords(const Mixture& mixture, int N, std::vector<double> init,
                                       const OptimizerOptions& options) {
    require(N >= 1, "optimize_codewords: N must be at least 1");
    require(static_cast<int>(init.size()) == N, "optimize_codewords: init must hold N codewords");
    require(admissible(init, -kInf), "optimize_codewords: init must be strictly increasing");
    // Codewords at or below the floor are spread evenly between the floor and
    // the first codeword above it.
    const auto above = std::find_if(init.begin(), init.end(), [&](double x) { return x > options.floor; });
    const auto clamped = above - init.begin();
    if (clamped > 0) {
        const double top = above == init.end() ? options.floor + 1.0 : *above;
        for (std::ptrdiff_t j = 0; j < clamped; ++j)
            init[j] = options.floor + (top - options.floor) * static_cast<double>(j) / static_cast<double>(clamped + 1);
    }
    require(admissible(init, options.floor), "optimize_codewords: init must be strictly increasing");

    const double tolerance = options.relative_tolerance * mixture.stddev();
    std::vector<double> grid = std::move(init);
    CellTerms terms = cell_terms(mixture, grid);
    std::vector<double> gradient = gradient_from(terms, grid);
    double gnorm = projected_norm(gradient, grid, options.floor);

    for (int iteration = 0; iteration <= options.max_iterations; ++iteration) {
        if (options.on_iteration) options.on_iteration(iteration, terms.distortion, gnorm);
        if (gnorm <= tolerance) return grid;
        if (iteration == options.max_iterations) break;

        // Exact Hessian of the distortion: tridiagonal through the shared edges.
        const std::size_t n = grid.size();
        std::vector<double> diag(n), off(n > 1 ? n - 1 : 0);
        for (std::size_t j = 0; j < n; ++j) {
            diag[j] = 2.0 * terms.mass[j];
            if (j + 1 < n) {
                const double coupling = 0.5 * terms.edge_density[j + 1] * (grid[j + 1] - grid[j]);
                diag[j] -= coupling;
                off[j] = -coupling;
            }
            if (j > 0) diag[j] -= 0.5 * terms.edge_density[j] * (grid[j] - grid[j - 1]);
        }
        std::vector<double> minus_gradient(n);
        for (std::size_t j = 0; j < n; ++j) minus_gradient[j] = -gradient[j];
        // Codewords held on the floor stay fixed in the Newton system.
        for (std::size_t j = 0; j < n; ++j) {
            if (!(grid[j] <= options.floor && gradient[j] > 0.0)) continue;
            diag[j] = 1.0;
            minus_gradient[j] = 0.0;
            if (j > 0) off[j - 1] = 0.0;
            if (j + 1 < n) off[j] = 0.0;
        }

        const double resolution = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(terms.distortion);
        bool accepted = false;
        std::vector<double> step;
        if (solve_tridiagonal(diag, off, minus_gradient, step)) {
            double damping = 1.0;
            for (int halving = 0; halving < 40 && !accepted; ++halving, damping *= 0.5) {
                std::vector<double> candidate(n);
                for (std::size_t j = 0; j < n; ++j) candidate[j] = std::max(grid[j] + damping * step[j], options.floor);
                if (!admissible(candidate, options.floor)) continue;
                CellTerms trial = cell_terms(mixture, candidate);
                // Close to the optimum the decrease is below the rounding
                // of the distortion itself; then accept a step that leaves
                // the distortion unchanged to within a few ulps and reduces
                // the gradient.
                const bool descends = trial.distortion <= terms.distortion;
                const bool flat = trial.distortion <= terms.distortion + resolution &&
                                  projected_norm(gradient_from(trial, candidate), candidate, options.floor) < gnorm;
                if (descends || flat) {
                    grid = std::move(candidate);
                    terms = std::move(trial);
                    accepted = true;
                }
            }
        }
        if (!accepted) {
            // Lloyd: move each codeword to the conditional mean of its cell.
            std::vector<double> candidate = grid;
            for (std::size_t j = 0; j < n; ++j)
                if (terms.mass[j] > 0.0) candidate[j] = std::max(terms.first_moment[j] / terms.mass[j], options.floor);
            if (admissible(candidate, options.floor)) {
                CellTerms trial = cell_terms(mixture, candidate);
                // Close to the optimum the decrease is below the rounding
                // of the distortion itself; then accept a step that leaves
                // the distortion unchanged to within a few ulps and reduces
                // the gradient.
                const bool descends = trial.distortion <= terms.distortion;
                const bool flat = trial.distortion <= terms.distortion + resolution &&
                                  projected_norm(gradient_from(trial, candidate), candidate, options.floor) < gnorm;
                if (descends || flat) {
                    grid = std::move(candidate);
                    terms = std::move(trial);
                    accepted = true;
                }
            }
        }
        if (!accepted) throw QuantizationError("optimize_codewords: no descent step available", grid, gnorm);
        gradient = gradient_from(terms, grid);
        gnorm = projected_norm(gradient, grid, options.floor);
    }
    throw QuantizationError("optimize_codewords: iteration limit reached", grid, gnorm);
}

std::vector<double> companion_probs(const Mixture& mixture, const std::vector<double>& codewords) {
    require(admissible(codewords, -kInf), "companion_probs: codewords must be strictly increasing");
    const std::vector<double> edges = voronoi_edges(codewords);
    std::vector<double> probs(codewords.size(), 0.0);
    for (std::size_t i = 0; i < mixture.size(); ++i) {
        for (std::size_t j = 0; j < codewords.size(); ++j) {
            const double lo = (edges[j] - mixture.means[i]) / mixture.stddevs[i];
            const double hi = (edges[j + 1] - mixture.means[i]) / mixture.stddevs[i];
            probs[j] += mixture.weights[i] * specfun::normal_cdf_diff(lo, hi);
        }
    }
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& p : probs) p /= total;
    return probs;
}

Eigen::MatrixXd transition_matrix(const std::vector<double>& prev_codewords, const GaussianSurrogate& surrogate,
                                  const std::vector<double>& next_codewords, double t, double dt) {
    require(admissible(prev_codewords, -kInf) && admissible(next_codewords, -kInf),
            "transition_matrix: grids must be strictly increasing");
    const std::vector<double> edges = voronoi_edges(next_codewords);
    Eigen::MatrixXd trans(prev_codewords.size(), next_codewords.size());
    for (std::size_t i = 0; i < prev_codewords.size(); ++i) {
        const double m = surrogate.mean_fn(prev_codewords[i], t, dt);
        const double var = surrogate.var_fn(prev_codewords[i], t, dt);
        require(var > 0.0, "transition_matrix: surrogate variance must be positive");
        const double s = std::sqrt(var);
        for (std::size_t j = 0; j < next_codewords.size(); ++j)
            trans(i, j) = specfun::normal_cdf_diff((edges[j] - m) / s, (edges[j + 1] - m) / s);
        trans.row(i) /= trans.row(i).sum();
    }
    return trans;
}

std::size_t QuantGrid::step_at(double t) const {
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::abs(times[k] - t) <= 1e-9) return k;
    throw DomainError("QuantGrid: time is not on the grid");
}

double QuantGrid::expectation(std::size_t step, const std::function<double(double)>& f) const {
    require(step < times.size(), "QuantGrid::expectation: step out of range");
    double sum = 0.0;
    for (std::size_t j = 0; j < codewords[step].size(); ++j) sum += probs[step][j] * f(codewords[step][j]);
    return sum;
}

void QuantGrid::validate() const {
    require(!times.empty() && codewords.size() == times.size() && probs.size() == times.size() &&
                trans.size() + 1 == times.size(),
            "QuantGrid: inconsistent sizes");
    for (std::size_t k = 0; k < times.size(); ++k) {
        require(k == 0 || times[k] > times[k - 1], "QuantGrid: times must increase");
        require(admissible(codewords[k], -kInf), "QuantGrid: codewords must be strictly increasing");
        require(codewords[k].size() == probs[k].size(), "QuantGrid: probability size mismatch");
        double total = 0.0;
        for (double p : probs[k]) {
            require(p >= 0.0, "QuantGrid: negative probability");
            total += p;
        }
        require(std::abs(total - 1.0) <= 1e-12, "QuantGrid: probabilities must sum to 1");
        if (k + 1 < times.size()) {
            require(trans[k].rows() == static_cast<Eigen::Index>(codewords[k].size()) &&
                        trans[k].cols() == static_cast<Eigen::Index>(codewords[k + 1].size()),
                    "QuantGrid: transition shape mismatch");
            require(trans[k].minCoeff() >= 0.0, "QuantGrid: negative transition probability");
            require(((trans[k].rowwise().sum().array() - 1.0).abs() <= 1e-12).all(),
                    "QuantGrid: transition rows must sum to 1");
        }
    }
}

QuantGrid rmq_build(const GaussianSurrogate& surrogate, double x0, double T, int steps_per_year, int N,
                    const RmqOptions& options) {
    require(N >= 1, "rmq_build: N must be at least 1");
    require(steps_per_year >= 1, "rmq_build: steps_per_year must be at least 1");
    require(T > 0.0, "rmq_build: horizon must be positive");
    require(x0 >= surrogate.floor, "rmq_build: start value below the positivity floor");
    const int steps = static_cast<int>(std::ceil(T * steps_per_year - 1e-9));
    const double dt = T / steps;

    QuantGrid grid;
    grid.times.reserve(steps + 1);
    for (int k = 0; k <= steps; ++k) grid.times.push_back(k == steps ? T : k * dt);
    grid.codewords.push_back({x0});
    grid.probs.push_back({1.0});

    OptimizerOptions optimizer = options.optimizer;
    optimizer.floor = std::max(optimizer.floor, surrogate.floor);
    double prev_mean = x0, prev_sd = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double t = grid.times[k];
        const Mixture mix = mixture_moments(grid.codewords[k], grid.probs[k], surrogate, t, dt);
        std::vector<double> init = initial_grid(grid.codewords[k], prev_mean, prev_sd, mix, N);
        std::vector<double> codewords;
        try {
            codewords = optimize_codewords(mix, N, std::move(init), optimizer);
        } catch (const QuantizationError& e) {
            throw QuantizationError(std::string(e.what()) + " at step " + std::to_string(k + 1), e.last_grid(),
                                    e.gradient_norm(), k + 1);
        }
        grid.trans.push_back(transition_matrix(grid.codewords[k], surrogate, codewords, t, dt));
        // Marginal consistency: next probabilities are the pushed-forward mass.
        Eigen::VectorXd prev = Eigen::Map<const Eigen::VectorXd>(grid.probs[k].data(), grid.probs[k].size());
        Eigen::VectorXd next = grid.trans.back().transpose() * prev;
        next /= next.sum();
        grid.probs.emplace_back(next.data(), next.data() + next.size());
        grid.codewords.push_back(std::move(codewords));
        prev_mean = mix.mean();
        prev_sd = mix.stddev();
        if (options.on_step) options.on_step(k + 1, grid.times[k + 1]);
    }
    return grid;
}

void write_grid_csv(const QuantGrid& grid, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    for (std::size_t k = 0; k < grid.times.size(); ++k) {
        std::ofstream out(directory / ("step_" + std::to_string(k) + ".csv"));
        if (!out) throw std::runtime_error("write_grid_csv: cannot open output file");
        out << "# t=" << format_number(grid.times[k]) << "\ncodeword,probability";
        const bool has_next = k + 1 < grid.times.size();
        if (has_next)
            for (std::size_t j = 0; j < grid.codewords[k + 1].size(); ++j) out << ",t_" << j;
        out << '\n';
        for (std::size_t i = 0; i < grid.codewords[k].size(); ++i) {
            out << format_number(grid.codewords[k][i]) << ',' << format_number(grid.probs[k][i]);
            if (has_next)
                for (Eigen::Index j = 0; j < grid.trans[k].cols(); ++j) out << ',' << format_number(grid.trans[k](i, j));
            out << '\n';
        }
    }
}

}  // namespace benchpricer
