#include "benchpricer/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "benchpricer/errors.hpp"

namespace benchpricer::specfun {
namespace {

using detail::require;

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kRescale = 1e200;
const double kLogRescale = std::log(kRescale);

bool is_nonpositive_integer(double v) { return v <= 0.0 && v == std::floor(v); }

// Sign of Gamma(v) for v not a nonpositive integer.
double gamma_sign(double v) {
    if (v > 0.0) return 1.0;
    return static_cast<long long>(std::floor(v)) % 2 == 0 ? 1.0 : -1.0;
}

double lower_gamma_series(double s, double x) {
    double ap = s;
    double del = 1.0 / s;
    double sum = del;
    for (int n = 0; n < 100000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-17) {
            return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
        }
    }
    throw ConvergenceError("reg_lower_gamma: series did not converge");
}

// Modified Lentz evaluation of the continued fraction for Q(s, x).
double upper_gamma_fraction(double s, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) {
            return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
        }
    }
    throw ConvergenceError("reg_upper_gamma: continued fraction did not converge");
}

// Ascending series for I_nu(x), returned as (sign, log|I|).
struct SignedLog {
    double sign;
    double log_abs;
};

SignedLog bessel_i_series(double nu, double x) {
    const double half = 0.5 * x;
    const double quarter_sq = half * half;
    // Leading term (x/2)^nu / Gamma(nu + 1), tracked as sign and log.
    double log_scale = nu * std::log(half) - std::lgamma(nu + 1.0);
    double term = gamma_sign(nu + 1.0);
    double sum = term;
    for (int k = 0; k < 200000; ++k) {
        const double denom = (k + 1.0) * (k + nu + 1.0);
        term *= quarter_sq / denom;
        sum += term;
        if (std::abs(sum) > kRescale) {
            sum /= kRescale;
            term /= kRescale;
            log_scale += kLogRescale;
        }
        if (k + 1.0 > half && std::abs(term) < kEps * 0.1 * std::abs(sum)) {
            return {sum < 0 ? -1.0 : 1.0, std::log(std::abs(sum)) + log_scale};
        }
    }
    throw ConvergenceError("bessel_i: series did not converge");
}

// Large-argument expansion of exp(-x) I_nu(x).
double bessel_i_scaled_asymptotic(double nu, double x) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
        if (std::abs(next) > std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < kEps * 0.1 * std::abs(sum)) break;
    }
    return sum / std::sqrt(2.0 * kPi * x);
}

bool use_asymptotic(double nu, double x) { return x > std::max(30.0, nu * nu); }

SignedLog bessel_i_signed_log(double nu, double x) {
    if (nu < 0.0 && nu == std::floor(nu)) nu = -nu;  // I_{-n} = I_n
    if (use_asymptotic(nu, x)) {
        const double s = bessel_i_scaled_asymptotic(nu, x);
        return {1.0, std::log(s) + x};
    }
    return bessel_i_series(nu, x);
}

// Power series of 1F1 with a running log scale: 1F1 = sum * exp(log_scale).
struct ScaledSum {
    double sum;
    double log_scale;
};

ScaledSum kummer_series(double a, double b, double x) {
    double term = 1.0;
    double sum = 1.0;
    double abs_sum = 1.0;
    double log_scale = 0.0;
    const int max_terms = 200000 + static_cast<int>(10.0 * std::abs(x));
    for (int k = 0; k < max_terms; ++k) {
        const double ratio = (a + k) / (b + k) * x / (k + 1.0);
        term *= ratio;
        sum += term;
        abs_sum += std::abs(term);
        if (term == 0.0) return {sum, log_scale};
        if (abs_sum > kRescale) {
            sum /= kRescale;
            abs_sum /= kRescale;
            term /= kRescale;
            log_scale += kLogRescale;
        }
        const bool decreasing = std::abs((a + k + 1.0) / (b + k + 1.0) * x / (k + 2.0)) < 1.0;
        if (decreasing && std::abs(term) < kEps * 0.1 * std::abs(sum)) {
            if (abs_sum * kEps > 1e-10 * std::abs(sum)) {
                throw ConvergenceError("kummer_1f1: cancellation exceeds tolerance");
            }
            return {sum, log_scale};
        }
    }
    throw ConvergenceError("kummer_1f1: series did not converge");
}

// Poisson mixture sum_j w_j * P(s0 + j, y) (or Q) summed outward from the
// modal index. The incomplete gamma values at neighbouring indices follow
// from g(s, y) = y^s e^{-y} / Gamma(s + 1):
//   P(s + 1, y) = P(s, y) - g(s, y),   Q(s + 1, y) = Q(s, y) + g(s, y).
double poisson_gamma_mixture(double s0, double y, double mu, bool upper) {
    const double mode = std::floor(mu);
    const double s_mode = s0 + mode;
    const double center = upper ? reg_upper_gamma(s_mode, y) : reg_lower_gamma(s_mode, y);
    const double g_mode = (y > 0.0) ? std::exp(s_mode * std::log(y) - y - std::lgamma(s_mode + 1.0)) : 0.0;
    const double sign = upper ? 1.0 : -1.0;
    constexpr double cutoff = 1e-20;

    // Weights relative to the modal weight; renormalised at the end.
    double weight_sum = 1.0;
    double total = center;

    // Upward.
    {
        double w = 1.0;
        double value = center;
        double g = g_mode;
        for (double j = mode; ; j += 1.0) {
            w *= mu / (j + 1.0);
            value += sign * g;
            value = std::clamp(value, 0.0, 1.0);
            g *= y / (s0 + j + 1.0);
            weight_sum += w;
            total += w * value;
            if (w < cutoff * weight_sum) break;
            if (j - mode > 1e7) throw ConvergenceError("nchi2: Poisson series did not converge");
        }
    }
    // Downward.
    {
        double w = 1.0;
        double value = center;
        double g = g_mode;  // g at s_mode
        for (double j = mode; j > 0.0; j -= 1.0) {
            w *= j / mu;
            const double s = s0 + j;  // current shape; step to s - 1
            g *= s / y;               // g(s - 1, y)
            if (!std::isfinite(g)) g = 0.0;
            value -= sign * g;
            value = std::clamp(value, 0.0, 1.0);
            weight_sum += w;
            total += w * value;
            if (w < cutoff * weight_sum) break;
        }
    }
    return std::clamp(total / weight_sum, 0.0, 1.0);
}

void check_nchi2_args(double x, double k, double lambda) {
    require(x >= 0.0, "nchi2: x must be nonnegative");
    require(k > 0.0, "nchi2: degrees of freedom must be positive");
    require(lambda >= 0.0, "nchi2: noncentrality must be nonnegative");
}

// Genz's BVNU: P(X > dh, Y > dk) for correlation r.
double bvnu(double dh, double dk, double r) {
    if (dh == kInf || dk == kInf) return 0.0;
    if (dh == -kInf) return dk == -kInf ? 1.0 : normal_cdf(-dk);
    if (dk == -kInf) return normal_cdf(-dh);
    if (r == 0.0) return normal_cdf(-dh) * normal_cdf(-dk);

    static constexpr std::array<double, 3> w6{0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
    static constexpr std::array<double, 3> x6{0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
    static constexpr std::array<double, 6> w12{0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                               0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
    static constexpr std::array<double, 6> x12{0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                                               0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
    static constexpr std::array<double, 10> w20{
        0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
        0.1019301198172404,  0.1181945319615184,  0.1316886384491766,  0.1420961093183821,
        0.1491729864726037,  0.1527533871307259};
    static constexpr std::array<double, 10> x20{
        0.9931285991850949, 0.9639719272779138, 0.9122344282513259, 0.8391169718222188,
        0.7463319064601508, 0.6360536807265150, 0.5108670019508271, 0.3737060887154196,
        0.2277858511416451, 0.07652652113349733};

    const double* w;
    const double* xg;
    int lg;
    if (std::abs(r) < 0.3) {
        w = w6.data(), xg = x6.data(), lg = 3;
    } else if (std::abs(r) < 0.75) {
        w = w12.data(), xg = x12.data(), lg = 6;
    } else {
        w = w20.data(), xg = x20.data(), lg = 10;
    }

    constexpr double tp = 2.0 * kPi;
    double h = dh;
    double k = dk;
    double hk = h * k;
    double bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = 0.5 * (h * h + k * k);
        const double asr = 0.5 * std::asin(r);
        for (int i = 0; i < lg; ++i) {
            for (double node : {1.0 - xg[i], 1.0 + xg[i]}) {
                const double sn = std::sin(asr * node);
                bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        return std::clamp(bvn * asr / tp + normal_cdf(-h) * normal_cdf(-k), 0.0, 1.0);
    }
    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (std::abs(r) < 1.0) {
        const double as = 1.0 - r * r;
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        double asr = -0.5 * (bs / as + hk);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 80.0;
        if (asr > -100.0) bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
        if (hk > -100.0) {
            const double b = std::sqrt(bs);
            const double sp = std::sqrt(tp) * normal_cdf(-b / a);
            bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
        }
        a *= 0.5;
        double acc = 0.0;
        for (int i = 0; i < lg; ++i) {
            for (double node : {1.0 - xg[i], 1.0 + xg[i]}) {
                const double xs = (a * node) * (a * node);
                asr = -0.5 * (bs / xs + hk);
                if (asr <= -100.0) continue;
                const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                const double rs = std::sqrt(1.0 - xs);
                const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
                acc += w[i] * std::exp(asr) * (sp - ep);
            }
        }
        bvn = (a * acc - bvn) / tp;
    }
    if (r > 0.0) {
        bvn += normal_cdf(-std::max(h, k));
    } else if (h >= k) {
        bvn = -bvn;
    } else {
        const double lower = (h < 0.0) ? normal_cdf(k) - normal_cdf(h) : normal_cdf(-h) - normal_cdf(-k);
        bvn = lower - bvn;
    }
    return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace

double ln_gamma(double x) {
    require(x > 0.0, "ln_gamma: argument must be positive");
    return std::lgamma(x);
}

double reg_lower_gamma(double s, double x) {
    require(s > 0.0, "reg_lower_gamma: shape must be positive");
    require(x >= 0.0, "reg_lower_gamma: argument must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < s + 1.0) return lower_gamma_series(s, x);
    return 1.0 - upper_gamma_fraction(s, x);
}

double reg_upper_gamma(double s, double x) {
    require(s > 0.0, "reg_upper_gamma: shape must be positive");
    require(x >= 0.0, "reg_upper_gamma: argument must be nonnegative");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < s + 1.0) return 1.0 - lower_gamma_series(s, x);
    return upper_gamma_fraction(s, x);
}

double bessel_i_scaled(double nu, double x) {
    require(x >= 0.0, "bessel_i: argument must be nonnegative");
    if (x == 0.0) {
        if (nu == 0.0) return 1.0;
        if (nu > 0.0 || (nu == std::floor(nu))) return 0.0;
        return gamma_sign(nu + 1.0) * kInf;
    }
    const SignedLog v = bessel_i_signed_log(nu, x);
    return v.sign * std::exp(v.log_abs - x);
}

double bessel_i(double nu, double x) {
    require(x >= 0.0, "bessel_i: argument must be nonnegative");
    if (x == 0.0) return bessel_i_scaled(nu, x);
    const SignedLog v = bessel_i_signed_log(nu, x);
    if (v.log_abs > std::log(std::numeric_limits<double>::max())) {
        throw DomainError("bessel_i: result overflows; use bessel_i_scaled or log_bessel_i");
    }
    return v.sign * std::exp(v.log_abs);
}

double log_bessel_i(double nu, double x) {
    require(x > 0.0, "log_bessel_i: argument must be positive");
    const SignedLog v = bessel_i_signed_log(nu, x);
    require(v.sign > 0.0, "log_bessel_i: I_nu(x) is not positive");
    return v.log_abs;
}

double kummer_1f1(double a, double b, double x) {
    require(!is_nonpositive_integer(b), "kummer_1f1: b must not be a nonpositive integer");
    if (x == 0.0 || a == 0.0) return 1.0;
    if (x < 0.0 && !is_nonpositive_integer(a)) {
        const ScaledSum s = kummer_series(b - a, b, -x);
        return s.sum * std::exp(x + s.log_scale);
    }
    const ScaledSum s = kummer_series(a, b, x);
    return s.sum * std::exp(s.log_scale);
}

double nchi2_cdf(double x, double k, double lambda) {
    check_nchi2_args(x, k, lambda);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (lambda == 0.0) return reg_lower_gamma(0.5 * k, 0.5 * x);
    return poisson_gamma_mixture(0.5 * k, 0.5 * x, 0.5 * lambda, false);
}

double nchi2_ccdf(double x, double k, double lambda) {
    check_nchi2_args(x, k, lambda);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (lambda == 0.0) return reg_upper_gamma(0.5 * k, 0.5 * x);
    return poisson_gamma_mixture(0.5 * k, 0.5 * x, 0.5 * lambda, true);
}

double nchi2_pdf(double x, double k, double lambda) {
    check_nchi2_args(x, k, lambda);
    const double mu = 0.5 * lambda;
    if (x == 0.0) {
        if (k < 2.0) return kInf;
        return k == 2.0 ? 0.5 * std::exp(-mu) : 0.0;
    }
    if (std::isinf(x)) return 0.0;
    // Central density with nu degrees of freedom:
    //   f(x; nu) = (x/2)^{nu/2 - 1} e^{-x/2} / (2 Gamma(nu/2)),  f(x; nu+2) = f(x; nu) x / nu.
    auto central_log = [x](double nu) {
        return (0.5 * nu - 1.0) * std::log(0.5 * x) - 0.5 * x - std::log(2.0) - std::lgamma(0.5 * nu);
    };
    if (lambda == 0.0) return std::exp(central_log(k));

    const double mode = std::floor(mu);
    const double nu_mode = k + 2.0 * mode;
    const double f_mode = std::exp(central_log(nu_mode));
    constexpr double cutoff = 1e-20;
    double weight_sum = 1.0;
    double total = f_mode;
    {
        double w = 1.0;
        double f = f_mode;
        for (double j = mode; ; j += 1.0) {
            w *= mu / (j + 1.0);
            f *= x / (k + 2.0 * j);
            weight_sum += w;
            total += w * f;
            if (w < cutoff * weight_sum) break;
        }
    }
    {
        double w = 1.0;
        double f = f_mode;
        for (double j = mode; j > 0.0; j -= 1.0) {
            w *= j / mu;
            f *= (k + 2.0 * j - 2.0) / x;
            weight_sum += w;
            total += w * f;
            if (w < cutoff * weight_sum) break;
        }
    }
    // Relative weights normalise to the Poisson law once the tails vanish.
    return total / weight_sum;
}

double nchi2_quantile(double p, double k, double lambda) {
    require(p > 0.0 && p < 1.0, "nchi2_quantile: need 0 < p < 1");
    check_nchi2_args(0.0, k, lambda);
    // Upper half solved on the complement so that tail quantiles keep their precision.
    const bool upper = p > 0.5;
    const double target = upper ? 1.0 - p : p;
    auto residual = [&](double x) { return upper ? target - nchi2_ccdf(x, k, lambda) : nchi2_cdf(x, k, lambda) - target; };

    double lo = 0.0;
    double hi = k + lambda;
    for (int i = 0; residual(hi) < 0.0; ++i) {
        if (i == 200) throw ConvergenceError("nchi2_quantile: could not bracket the quantile");
        lo = hi;
        hi *= 2.0;
    }
    double x = upper ? hi : 0.5 * (lo + hi);
    for (int i = 0; i < 300; ++i) {
        const double r = residual(x);
        if (r == 0.0) return x;
        (r < 0.0 ? lo : hi) = x;
        if (hi - lo <= 4e-16 * hi) return 0.5 * (lo + hi);
        const double density = nchi2_pdf(x, k, lambda);
        double next = x - r / density;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * x) return next;
        x = next;
    }
    throw ConvergenceError("nchi2_quantile: no convergence");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

double normal_cdf_diff(double a, double b) {
    if (b <= a) return 0.0;
    constexpr double s = std::numbers::sqrt2;
    if (a >= 0.0) return 0.5 * (std::erfc(a / s) - std::erfc(b / s));
    if (b <= 0.0) return 0.5 * (std::erfc(-b / s) - std::erfc(-a / s));
    return 1.0 - 0.5 * std::erfc(-a / s) - 0.5 * std::erfc(b / s);
}

double bivariate_normal_cdf(double h, double k, double rho) {
    require(rho >= -1.0 && rho <= 1.0, "bivariate_normal_cdf: correlation must lie in [-1, 1]");
    require(!std::isnan(h) && !std::isnan(k), "bivariate_normal_cdf: NaN limit");
    return bvnu(-h, -k, rho);
}

}  // namespace benchpricer::specfun
