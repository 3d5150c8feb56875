#include "benchpricer/montecarlo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>

#include "benchpricer/errors.hpp"

namespace benchpricer {
namespace {

using detail::require;

constexpr std::int64_t kBatch = 4096;  // samples per batch
constexpr double kRateFloor = 1e-8;
constexpr double kGopFloor = 1e-8;

struct Welford {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const Welford& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const auto total = n + o.n;
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / static_cast<double>(total);
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / static_cast<double>(total);
        n = total;
    }
};

McEstimate finish(const Welford& w, std::int64_t paths, double scale = 1.0) {
    McEstimate e;
    e.mean = scale * w.mean;
    e.std_error = w.n > 1 ? std::abs(scale) * std::sqrt(w.m2 / static_cast<double>(w.n - 1) / static_cast<double>(w.n)) : 0.0;
    e.paths = paths;
    return e;
}

std::int64_t sample_count(const McConfig& cfg) { return cfg.antithetic ? cfg.paths / 2 : cfg.paths; }

// Calls body(batch, first_sample, count, rng) for every batch, spread over the
// workers. Batch b always draws from stream b of the seed.
template <class Body>
void for_each_batch(std::int64_t samples, std::uint64_t seed, Body body) {
    const std::int64_t batches = (samples + kBatch - 1) / kBatch;
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::int64_t b = next.fetch_add(1);
            if (b >= batches) return;
            try {
                RandomSource rng(seed, static_cast<std::uint64_t>(b));
                const std::int64_t first = b * kBatch;
                body(b, first, std::min(kBatch, samples - first), rng);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(batches);
                return;
            }
        }
    };
    const int workers = static_cast<int>(std::min<std::int64_t>(worker_count(), batches));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
}

double vanilla(OptionKind kind, double K, double s) {
    return kind == OptionKind::Put ? std::max(K - s, 0.0) : std::max(s - K, 0.0);
}

// Exact move of one or two lanes of X̄ from t to T. Two lanes share the
// central chi-squared part and use mirrored normals in the noncentral part.
void exact_step(const TcevParams& p, double t, double T, double* x, int lanes, RandomSource& rng) {
    if (lanes == 1) {
        x[0] = tcev_exact_sample(p, x[0], t, T, rng);
        return;
    }
    const double dphi = tcev_phi(p, T) - tcev_phi(p, t);
    const double z = rng.normal();
    const double central = rng.chi2(tcev_dimension(p) - 1.0);
    for (int l = 0; l < lanes; ++l) {
        const double shift = std::sqrt(tcev_to_besq(p, x[l]) / dphi);
        const double q = (l == 0 ? z + shift : -z + shift);
        x[l] = tcev_from_besq(p, dphi * (q * q + central));
    }
}

// Number of 1/spy steps to each maturity; throws if one is off the grid.
std::vector<std::int64_t> maturity_steps(const std::vector<double>& maturities, int spy) {
    require(!maturities.empty(), "monte carlo: no maturities");
    std::vector<std::int64_t> steps;
    for (double T : maturities) {
        require(T > 0.0 && std::isfinite(T), "monte carlo: maturities must be positive");
        const double exact = T * spy;
        const auto n = static_cast<std::int64_t>(std::llround(exact));
        require(std::abs(exact - static_cast<double>(n)) <= 1e-9 * std::max(1.0, exact),
                "monte carlo: maturity is not on the simulation time grid");
        require(steps.empty() || n > steps.back(), "monte carlo: maturities must increase");
        steps.push_back(n);
    }
    return steps;
}

// Joint simulation of the 3/2 rate and X̄. observe(m, r, x, discount, out)
// adds the benchmarked contributions for maturity index m into
// out[m * width .. (m + 1) * width).
template <class Observe>
std::vector<McEstimate> simulate_hybrid(const Rate32Params& pr, const TcevParams& px, double rho,
                                        const std::vector<double>& maturities, const McConfig& cfg,
                                        GopScheme scheme, std::size_t width, Observe observe) {
    cfg.validate();
    pr.validate();
    px.validate();
    require(std::abs(rho) < 1.0, "monte carlo: |rho| must be below 1");
    if (scheme == GopScheme::Automatic) scheme = rho == 0.0 ? GopScheme::Exact : GopScheme::SquareRoot;
    require(!(scheme == GopScheme::Exact && rho != 0.0), "monte carlo: exact GOP steps need rho = 0");
    const bool stepwise = scheme != GopScheme::Exact;
    const double dim = tcev_dimension(px);
    const std::vector<std::int64_t> steps = maturity_steps(maturities, cfg.steps_per_year);
    const double dt = 1.0 / cfg.steps_per_year;
    const double sqrt_dt = std::sqrt(dt);
    const double idio = std::sqrt(1.0 - rho * rho);
    const int lanes = cfg.antithetic ? 2 : 1;
    const std::size_t outputs = maturities.size() * width;

    const std::int64_t samples = sample_count(cfg);
    std::vector<std::vector<Welford>> batch_stats((samples + kBatch - 1) / kBatch);
    for_each_batch(samples, cfg.seed, [&](std::int64_t b, std::int64_t, std::int64_t count, RandomSource& rng) {
        std::vector<Welford> stats(outputs);
        std::vector<double> out(outputs);
        for (std::int64_t s = 0; s < count; ++s) {
            std::fill(out.begin(), out.end(), 0.0);
            double r[2] = {pr.r0, pr.r0}, x[2] = {px.x0, px.x0}, accrued[2] = {0.0, 0.0};
            double last_exact = 0.0;
            std::size_t m = 0;
            for (std::int64_t k = 0; k < steps.back(); ++k) {
                const double t = static_cast<double>(k) * dt;
                const double z1 = rng.normal();
                const double z2 = stepwise ? rng.normal() : 0.0;
                double dphi = 0.0, central = 0.0;
                if (scheme == GopScheme::SquareRoot) {
                    dphi = tcev_phi(px, t + dt) - tcev_phi(px, t);
                    central = rng.chi2(dim - 1.0);
                }
                for (int l = 0; l < lanes; ++l) {
                    const double sign = l == 0 ? 1.0 : -1.0;
                    const double next_r = std::max(
                        r[l] + rate32_drift(pr, r[l]) * dt + rate32_diffusion(pr, r[l]) * sqrt_dt * sign * z1, kRateFloor);
                    accrued[l] += 0.5 * (r[l] + next_r) * dt;
                    r[l] = next_r;
                    const double zx = sign * (rho * z1 + idio * z2);
                    if (scheme == GopScheme::Euler) {
                        x[l] = std::max(x[l] + tcev_drift(px, x[l], t) * dt + tcev_diffusion(px, x[l], t) * sqrt_dt * zx,
                                        kGopFloor);
                    } else if (scheme == GopScheme::SquareRoot) {
                        const double radial = std::sqrt(tcev_to_besq(px, x[l])) + std::sqrt(dphi) * zx;
                        x[l] = tcev_from_besq(px, radial * radial + dphi * central);
                    }
                }
                if (k + 1 == steps[m]) {
                    if (!stepwise) {
                        exact_step(px, last_exact, maturities[m], x, lanes, rng);
                        last_exact = maturities[m];
                    }
                    for (int l = 0; l < lanes; ++l)
                        observe(m, r[l], x[l], std::exp(-accrued[l]) / lanes, out.data() + m * width);
                    ++m;
                }
            }
            for (std::size_t q = 0; q < outputs; ++q) stats[q].add(out[q]);
        }
        batch_stats[b] = std::move(stats);
    });
    std::vector<Welford> total(outputs);
    for (const auto& stats : batch_stats)
        for (std::size_t q = 0; q < outputs; ++q) total[q].merge(stats[q]);
    std::vector<McEstimate> result;
    for (const Welford& w : total) result.push_back(finish(w, cfg.paths));
    return result;
}

}  // namespace

void McConfig::validate() const {
    require(paths >= 2, "McConfig: paths must be at least 2");
    require(steps_per_year >= 1, "McConfig: steps_per_year must be at least 1");
    require(!antithetic || paths % 2 == 0, "McConfig: antithetic sampling needs an even path count");
}

int worker_count() {
    if (const char* env = std::getenv("BENCHPRICER_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

McEstimate mc_european(const TcevParams& p, double r, double t, double T, const std::function<double(double)>& payoff,
                       const McConfig& cfg) {
    cfg.validate();
    p.validate();
    require(T > t && t >= 0.0, "mc_european: need 0 <= t < T");
    const double dphi = tcev_phi(p, T) - tcev_phi(p, t);
    const double dim = tcev_dimension(p);
    const double lambda = tcev_to_besq(p, p.x0) / dphi;
    const double beta_T = std::exp(r * T);
    auto benchmarked = [&](double q) {
        const double gop = beta_T * tcev_from_besq(p, dphi * q);
        return payoff(gop) / gop;
    };

    const std::int64_t samples = sample_count(cfg);
    std::vector<Welford> batch_stats((samples + kBatch - 1) / kBatch);
    for_each_batch(samples, cfg.seed, [&](std::int64_t b, std::int64_t, std::int64_t count, RandomSource& rng) {
        Welford w;
        for (std::int64_t s = 0; s < count; ++s) {
            if (cfg.antithetic) {
                const auto [q1, q2] = rng.nchi2_antithetic(dim, lambda);
                w.add(0.5 * (benchmarked(q1) + benchmarked(q2)));
            } else {
                w.add(benchmarked(rng.nchi2(dim, lambda)));
            }
        }
        batch_stats[b] = w;
    });
    Welford total;
    for (const Welford& w : batch_stats) total.merge(w);
    return finish(total, cfg.paths, std::exp(r * t) * p.x0);
}

McEstimate mc_european(const TcevParams& p, double r, const EuropeanSpec& spec, const McConfig& cfg) {
    spec.validate();
    return mc_european(p, r, spec.t, spec.T, [&](double s) { return vanilla(spec.kind, spec.K, s); }, cfg);
}

std::vector<McEstimate> mc_bermudan_lsmc_strikes(const TcevParams& p, double r,
                                                 const std::vector<double>& exercise_times,
                                                 const std::vector<double>& strikes, OptionKind kind,
                                                 const McConfig& cfg, int basis_degree) {
    cfg.validate();
    p.validate();
    require(!strikes.empty(), "mc_bermudan_lsmc: no strikes");
    for (double K : strikes) BermudanSpec{exercise_times, K, kind}.validate();
    require(basis_degree >= 0, "mc_bermudan_lsmc: basis degree must be nonnegative");
    const std::vector<double>& dates = exercise_times;
    const auto L = static_cast<Eigen::Index>(dates.size());
    const int lanes = cfg.antithetic ? 2 : 1;
    const std::int64_t samples = sample_count(cfg);
    const Eigen::Index P = static_cast<Eigen::Index>(samples * lanes);

    // Column c holds one path at every exercise date; pairs are adjacent.
    Eigen::MatrixXd paths(L, P);
    for_each_batch(samples, cfg.seed, [&](std::int64_t, std::int64_t first, std::int64_t count, RandomSource& rng) {
        for (std::int64_t s = 0; s < count; ++s) {
            double x[2] = {p.x0, p.x0};
            double t = 0.0;
            for (Eigen::Index d = 0; d < L; ++d) {
                exact_step(p, t, dates[d], x, lanes, rng);
                t = dates[d];
                for (int l = 0; l < lanes; ++l) paths(d, (first + s) * lanes + l) = x[l];
            }
        }
    });

    std::vector<McEstimate> result;
    for (double K : strikes) {
        auto exercise = [&](Eigen::Index d, double x) {
            const double gop = std::exp(r * dates[d]) * x;
            return vanilla(kind, K, gop) / gop;
        };
        Eigen::VectorXd cashflow(P);
        for (Eigen::Index c = 0; c < P; ++c) cashflow(c) = exercise(L - 1, paths(L - 1, c));

        int degree = basis_degree;
        for (Eigen::Index d = L - 1; d-- > 0;) {
            std::vector<Eigen::Index> itm;
            for (Eigen::Index c = 0; c < P; ++c)
                if (exercise(d, paths(d, c)) > 0.0) itm.push_back(c);
            if (itm.empty()) continue;
            Eigen::VectorXd coef;
            for (;;) {
                const auto cols = static_cast<Eigen::Index>(degree + 1);
                if (static_cast<Eigen::Index>(itm.size()) >= cols) {
                    Eigen::MatrixXd basis(static_cast<Eigen::Index>(itm.size()), cols);
                    Eigen::VectorXd target(basis.rows());
                    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
                        const double u = paths(d, itm[i]) / p.x0;
                        double power = 1.0;
                        for (Eigen::Index k = 0; k < cols; ++k, power *= u) basis(i, k) = power;
                        target(i) = cashflow(itm[i]);
                    }
                    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
                    if (qr.rank() == cols) {
                        coef = qr.solve(target);
                        break;
                    }
                }
                if (degree == 0) break;
                std::cerr << "warning: mc_bermudan_lsmc: rank-deficient regression at t=" << dates[d]
                          << ", reducing basis degree to " << degree - 1 << '\n';
                --degree;
            }
            if (coef.size() == 0) continue;
            for (Eigen::Index c : itm) {
                const double u = paths(d, c) / p.x0;
                double continuation = 0.0, power = 1.0;
                for (Eigen::Index k = 0; k < coef.size(); ++k, power *= u) continuation += coef(k) * power;
                const double now = exercise(d, paths(d, c));
                if (now > continuation) cashflow(c) = now;
            }
        }

        Welford total;
        for (std::int64_t s = 0; s < samples; ++s) {
            double v = 0.0;
            for (int l = 0; l < lanes; ++l) v += cashflow(s * lanes + l);
            total.add(v / lanes);
        }
        result.push_back(finish(total, cfg.paths, p.x0));
    }
    return result;
}

McEstimate mc_bermudan_lsmc(const TcevParams& p, double r, const BermudanSpec& spec, const McConfig& cfg,
                            int basis_degree) {
    spec.validate();
    return mc_bermudan_lsmc_strikes(p, r, spec.exercise_times, {spec.K}, spec.kind, cfg, basis_degree).front();
}

Rate32PathStats mc_rate32_euler_paths(const Rate32Params& p, double T, const McConfig& cfg) {
    cfg.validate();
    p.validate();
    require(T > 0.0, "mc_rate32_euler_paths: horizon must be positive");
    const auto steps = static_cast<std::int64_t>(std::ceil(T * cfg.steps_per_year - 1e-9));
    const double dt = T / static_cast<double>(steps);
    const double sqrt_dt = std::sqrt(dt);
    const int lanes = cfg.antithetic ? 2 : 1;
    const std::int64_t samples = sample_count(cfg);
    std::vector<Welford> discount_stats((samples + kBatch - 1) / kBatch), rate_stats(discount_stats.size());
    for_each_batch(samples, cfg.seed, [&](std::int64_t b, std::int64_t, std::int64_t count, RandomSource& rng) {
        Welford disc, rate;
        for (std::int64_t s = 0; s < count; ++s) {
            double r[2] = {p.r0, p.r0}, accrued[2] = {0.0, 0.0};
            for (std::int64_t k = 0; k < steps; ++k) {
                const double z = rng.normal();
                for (int l = 0; l < lanes; ++l) {
                    const double next = std::max(
                        r[l] + rate32_drift(p, r[l]) * dt + rate32_diffusion(p, r[l]) * sqrt_dt * (l == 0 ? z : -z),
                        kRateFloor);
                    accrued[l] += 0.5 * (r[l] + next) * dt;
                    r[l] = next;
                }
            }
            double d = 0.0, rt = 0.0;
            for (int l = 0; l < lanes; ++l) {
                d += std::exp(-accrued[l]) / lanes;
                rt += r[l] / lanes;
            }
            disc.add(d);
            rate.add(rt);
        }
        discount_stats[b] = disc;
        rate_stats[b] = rate;
    });
    Welford disc, rate;
    for (std::size_t b = 0; b < discount_stats.size(); ++b) {
        disc.merge(discount_stats[b]);
        rate.merge(rate_stats[b]);
    }
    return {finish(disc, cfg.paths), finish(rate, cfg.paths)};
}

std::vector<McEstimate> mc_hybrid_zcb_curve(const Rate32Params& p_rate, const TcevParams& p_tcev, double rho,
                                            const std::vector<double>& maturities, const McConfig& cfg,
                                            GopScheme scheme) {
    const double x0 = p_tcev.x0;
    return simulate_hybrid(p_rate, p_tcev, rho, maturities, cfg, scheme, 1,
                           [&](std::size_t, double, double x, double discount, double* out) {
                               out[0] += discount * x0 / x;
                           });
}

McEstimate mc_hybrid_zcb(const Rate32Params& p_rate, const TcevParams& p_tcev, double rho, double T,
                         const McConfig& cfg, GopScheme scheme) {
    return mc_hybrid_zcb_curve(p_rate, p_tcev, rho, {T}, cfg, scheme).front();
}

std::vector<McEstimate> mc_zcb_option_strikes(const Rate32Params& p_rate, const TcevParams& p_tcev, double rho,
                                              double T, double S, const std::vector<double>& strikes,
                                              OptionKind kind, const McConfig& cfg, GopScheme scheme) {
    require(!strikes.empty(), "mc_zcb_option_strikes: no strikes");
    for (double K : strikes) BondOptionSpec{T, S, K, kind}.validate();
    const double x0 = p_tcev.x0;
    return simulate_hybrid(p_rate, p_tcev, rho, {T}, cfg, scheme, strikes.size(),
                           [&](std::size_t, double r, double x, double discount, double* out) {
                               const double bond = mpor_component(p_tcev, T, S, x) * ir_component_32(p_rate, T, S, r);
                               const double weight = discount * x0 / x;
                               for (std::size_t k = 0; k < strikes.size(); ++k)
                                   out[k] += weight * vanilla(kind, strikes[k], bond);
                           });
}

McEstimate mc_zcb_option(const Rate32Params& p_rate, const TcevParams& p_tcev, double rho,
                         const BondOptionSpec& spec, const McConfig& cfg, GopScheme scheme) {
    return mc_zcb_option_strikes(p_rate, p_tcev, rho, spec.T, spec.S, {spec.K}, spec.kind, cfg, scheme).front();
}

}  // namespace benchpricer
