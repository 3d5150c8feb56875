#include "experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <system_error>
#include <unistd.h>

#include "CLI11.hpp"

#include "benchpricer/analytic.hpp"
#include "benchpricer/errors.hpp"
#include "benchpricer/montecarlo.hpp"
#include "benchpricer/pricers.hpp"

#ifndef BENCHPRICER_VERSION
#define BENCHPRICER_VERSION "0.0.0"
#endif

namespace benchpricer::cli {
namespace {

using nlohmann::json;

// Inclusive arithmetic range. Points are snapped to 1e-12 so that -0.9 by 0.3 hits 0 exactly.
std::vector<double> range(double first, double last, double step) {
    const long n = std::lround((last - first) / step);
    std::vector<double> out;
    for (long i = 0; i <= n; ++i) out.push_back(std::round((first + static_cast<double>(i) * step) * 1e12) / 1e12);
    return out;
}

std::vector<double> monthly(double first, double last) {
    std::vector<double> out;
    for (long m = std::lround(first * 12); m <= std::lround(last * 12); ++m) out.push_back(static_cast<double>(m) / 12.0);
    return out;
}

void log(const RunConfig& c, const std::string& message) { std::cerr << "[" << c.experiment << "] " << message << "\n"; }

const char* method_name(Method m) {
    switch (m) {
        case Method::Analytic: return "analytic";
        case Method::Rmq: return "rmq";
        case Method::Mc: return "mc";
        case Method::All: return "all";
    }
    return "all";
}

Method parse_method(const std::string& s) {
    if (s == "analytic") return Method::Analytic;
    if (s == "rmq") return Method::Rmq;
    if (s == "mc") return Method::Mc;
    if (s == "all") return Method::All;
    throw ConfigError("method must be one of analytic, rmq, mc, all (got '" + s + "')");
}

RunConfig defaults_for(const std::string& name) {
    RunConfig c;
    c.experiment = name;
    c.output_dir = "out";
    if (name == "fig1-eur-put-rn-vs-rw") {
        c.maturities = range(5.0, 15.0, 1.0 / 6.0);
        c.moneyness = {1.0};
    } else if (name == "fig2-call-surface-rmq-error") {
        c.maturities = monthly(10.0, 15.0);
        c.moneyness = range(0.8, 1.2, 0.05);
        c.rmq_scheme = SchemeOrder::Euler;
        c.rmq_steps_per_year = 24;
        c.rmq_codewords = 50;
    } else if (name == "fig3-bermudan-lsmc-vs-rmq") {
        c.strikes = range(40.0, 60.0, 2.5);
        c.rmq_scheme = SchemeOrder::Euler;
        c.rmq_codewords = 100;
        c.mc_paths = 500000;
    } else if (name == "fig4-zcb-rn-vs-rw" || name == "fig5-hybrid-zcb-mc-vs-rmq") {
        c.maturities = monthly(1.0 / 12.0, 15.0);
    } else if (name == "fig6-correlation-sweep") {
        c.maturities = monthly(1.0 / 12.0, 15.0);
        c.correlations = range(-0.9, 0.9, 0.3);
    } else if (name == "fig7-zcb-option-mc-vs-rmq") {
        c.option_expiry = 10.0;
        c.bond_maturity = 15.0;
    } else if (name == "fig8-zco-rn-vs-rw") {
        c.option_expiry = 5.0;
        c.bond_maturity = 10.0;
    } else {
        throw ConfigError("unknown experiment '" + name + "'");
    }
    return c;
}

// Rejects keys outside `known` so that typos do not silently fall back to defaults.
void check_keys(const json& object, const std::string& where, const std::set<std::string>& known) {
    if (!object.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& item : object.items())
        if (!known.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

template <class T>
void read(const json& object, const char* key, T& target) {
    if (object.contains(key)) target = object.at(key).get<T>();
}

bool on_grid(double t, int per_year) {
    const double n = t * per_year;
    return std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, n);
}

void require_config(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

void require_increasing_positive(const std::vector<double>& v, const std::string& name) {
    require_config(!v.empty(), name + " must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        require_config(std::isfinite(v[i]) && v[i] > 0.0, name + " must be positive");
        require_config(i == 0 || v[i] > v[i - 1], name + " must increase");
    }
}

bool uses_maturities(const std::string& e) {
    return e == "fig1-eur-put-rn-vs-rw" || e == "fig2-call-surface-rmq-error" || e == "fig4-zcb-rn-vs-rw" ||
           e == "fig5-hybrid-zcb-mc-vs-rmq" || e == "fig6-correlation-sweep";
}

bool is_bond_option(const std::string& e) { return e == "fig7-zcb-option-mc-vs-rmq" || e == "fig8-zco-rn-vs-rw"; }

void validate(const RunConfig& c) {
    try {
        c.gop.validate();
        c.short_rate.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    require_config(std::isfinite(c.savings_rate), "savings_rate must be finite");
    require_config(c.rmq_steps_per_year >= 1, "rmq.steps_per_year must be at least 1");
    require_config(c.rmq_codewords >= 1 && c.rmq_rate_codewords >= 1 && c.rmq_gop_codewords >= 1,
                   "rmq codeword counts must be at least 1");
    require_config(c.mc_paths >= 2, "mc.paths must be at least 2");
    require_config(!c.mc_antithetic || c.mc_paths % 2 == 0, "mc.paths must be even with antithetic sampling");
    require_config(c.mc_steps_per_year >= 1, "mc.steps_per_year must be at least 1");
    require_config(c.lsmc_degree >= 0 && c.lsmc_degree <= 8, "mc.lsmc_degree must be in [0, 8]");
    require_config(std::abs(c.correlation) < 1.0, "grid.correlation must lie in (-1, 1)");
    for (double rho : c.correlations) require_config(std::abs(rho) < 1.0, "grid.correlations must lie in (-1, 1)");

    const std::string& e = c.experiment;
    if (uses_maturities(e)) {
        require_increasing_positive(c.maturities, "grid.maturities");
        for (double T : c.maturities) {
            if (c.wants(Method::Rmq))
                require_config(on_grid(T, c.rmq_steps_per_year), "maturities must lie on the rmq time grid");
            if (c.wants(Method::Mc) && e != "fig1-eur-put-rn-vs-rw" && e != "fig2-call-surface-rmq-error")
                require_config(on_grid(T, c.mc_steps_per_year), "maturities must lie on the mc time grid");
        }
    }
    if (e == "fig1-eur-put-rn-vs-rw" || e == "fig2-call-surface-rmq-error")
        require_increasing_positive(c.moneyness, "grid.moneyness");
    if (e == "fig3-bermudan-lsmc-vs-rmq") {
        require_increasing_positive(c.strikes, "grid.strikes");
        require_config(c.exercises_per_year >= 1, "grid.exercises_per_year must be at least 1");
        require_config(c.exercise_horizon > 0.0 && on_grid(c.exercise_horizon, c.exercises_per_year),
                       "grid.exercise_horizon must be a whole number of exercise periods");
        if (c.wants(Method::Rmq))
            require_config(c.rmq_steps_per_year % c.exercises_per_year == 0,
                           "rmq.steps_per_year must be a multiple of grid.exercises_per_year");
    }
    if (e == "fig6-correlation-sweep") require_config(!c.correlations.empty(), "grid.correlations must not be empty");
    if (is_bond_option(e)) {
        require_config(c.option_expiry > 0.0 && c.bond_maturity > c.option_expiry,
                       "need 0 < grid.option_expiry < grid.bond_maturity");
        require_config(c.forward_low > 0.0 && c.forward_high > c.forward_low,
                       "need 0 < grid.forward_low < grid.forward_high");
        require_config(c.strike_count >= 2, "grid.strike_count must be at least 2");
        if (c.wants(Method::Rmq))
            require_config(on_grid(c.option_expiry, c.rmq_steps_per_year), "option expiry must lie on the rmq grid");
        if (c.wants(Method::Mc))
            require_config(on_grid(c.option_expiry, c.mc_steps_per_year), "option expiry must lie on the mc grid");
        require_config(c.method != Method::Analytic, e + " has no analytic method");
    }
}

// ---- experiment bodies ----

// Columns are appended as they are computed; every row gets the same set.
class TableBuilder {
public:
    explicit TableBuilder(std::size_t rows) : rows_(rows) {}

    void add(const std::string& name, const std::string& unit, std::vector<double> values) {
        if (values.size() != rows_) throw std::logic_error("column " + name + " has the wrong length");
        columns_.push_back({name, unit});
        data_.push_back(std::move(values));
    }

    Table finish() const {
        Table t;
        t.columns = columns_;
        t.rows.assign(rows_, {});
        for (std::size_t r = 0; r < rows_; ++r)
            for (const auto& column : data_) t.rows[r].push_back(column[r]);
        return t;
    }

    bool has(const std::string& name) const {
        return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
    }

    const std::vector<double>& get(const std::string& name) const {
        for (std::size_t i = 0; i < columns_.size(); ++i)
            if (columns_[i].name == name) return data_[i];
        throw std::logic_error("no column " + name);
    }

private:
    std::size_t rows_;
    std::vector<Column> columns_;
    std::vector<std::vector<double>> data_;
};

McConfig mc_config(const RunConfig& c) {
    McConfig m;
    m.paths = c.mc_paths;
    m.steps_per_year = c.mc_steps_per_year;
    m.seed = c.seed;
    m.antithetic = c.mc_antithetic;
    return m;
}

constexpr const char* kPrice = "GOP currency units";
constexpr const char* kBond = "per unit face value";
constexpr const char* kYears = "years";
constexpr const char* kFraction = "fraction";

std::vector<double> ratio_gap(const std::vector<double>& reference, const std::vector<double>& value) {
    std::vector<double> out;
    for (std::size_t i = 0; i < value.size(); ++i) out.push_back((reference[i] - value[i]) / reference[i]);
    return out;
}

std::vector<double> relative_error(const std::vector<double>& value, const std::vector<double>& reference) {
    std::vector<double> out;
    for (std::size_t i = 0; i < value.size(); ++i) out.push_back(value[i] / reference[i] - 1.0);
    return out;
}

std::vector<double> z_scores(const std::vector<double>& value, const std::vector<double>& mc,
                             const std::vector<double>& se) {
    std::vector<double> out;
    for (std::size_t i = 0; i < value.size(); ++i) out.push_back((value[i] - mc[i]) / se[i]);
    return out;
}

void split(const std::vector<McEstimate>& estimates, std::vector<double>& mean, std::vector<double>& se) {
    for (const McEstimate& e : estimates) {
        mean.push_back(e.mean);
        se.push_back(e.std_error);
    }
}

QuantGrid gop_grid(const RunConfig& c, double horizon) {
    log(c, "building gop grid to " + format_number(horizon) + "y");
    return rmq_build(tcev_surrogate(c.gop, c.rmq_scheme), c.gop.x0, horizon, c.rmq_steps_per_year, c.rmq_codewords);
}

JointQuantGrid joint_grid(const RunConfig& c, double rho, double horizon) {
    log(c, "building joint grid to " + format_number(horizon) + "y, correlation " + format_number(rho));
    return joint_rmq_build(c.short_rate, c.gop, c.rmq_scheme, rho, horizon, c.rmq_steps_per_year,
                           c.rmq_rate_codewords, c.rmq_gop_codewords);
}

// Rows: every (maturity, moneyness) pair, maturity outermost.
Table vanilla_surface(const RunConfig& c, OptionKind kind) {
    const bool put = kind == OptionKind::Put;
    const std::string tag = put ? "put" : "call";
    std::vector<double> maturity, money, strike;
    for (double T : c.maturities)
        for (double m : c.moneyness) {
            maturity.push_back(T);
            money.push_back(m);
            strike.push_back(m * c.gop.x0);
        }
    TableBuilder t(maturity.size());
    t.add("maturity", kYears, maturity);
    t.add("moneyness", "strike over initial GOP value", money);
    t.add("strike", kPrice, strike);
    auto spec = [&](std::size_t i) { return EuropeanSpec{0.0, maturity[i], strike[i], kind}; };

    if (c.wants(Method::Analytic)) {
        std::vector<double> rw, rn;
        for (std::size_t i = 0; i < maturity.size(); ++i) {
            rw.push_back(put ? real_world_put(c.gop, c.savings_rate, spec(i)) : real_world_call(c.gop, c.savings_rate, spec(i)));
            rn.push_back(put ? benchpricer::rn_put(c.gop, c.savings_rate, spec(i))
                             : benchpricer::rn_call(c.gop, c.savings_rate, spec(i)));
        }
        t.add("rw_" + tag + "_analytic", kPrice, rw);
        t.add("rn_" + tag + "_analytic", kPrice, rn);
        if (put) t.add("rn_rw_gap", "fraction of the classical put", ratio_gap(rn, rw));
    }
    if (c.wants(Method::Rmq)) {
        const QuantGrid grid = gop_grid(c, c.maturities.back());
        std::vector<double> v;
        for (std::size_t i = 0; i < maturity.size(); ++i) v.push_back(european_price_rmq(grid, c.savings_rate, spec(i)));
        t.add("rw_" + tag + "_rmq", kPrice, v);
        if (t.has("rw_" + tag + "_analytic"))
            t.add("rmq_rel_error", kFraction, relative_error(v, t.get("rw_" + tag + "_analytic")));
    }
    if (c.wants(Method::Mc)) {
        log(c, "monte carlo, " + std::to_string(c.mc_paths) + " paths per point");
        std::vector<double> mean, se;
        for (std::size_t i = 0; i < maturity.size(); ++i) {
            McConfig m = mc_config(c);
            m.seed = c.seed + i;  // one stream per point keeps points independent
            const McEstimate e = mc_european(c.gop, c.savings_rate, spec(i), m);
            mean.push_back(e.mean);
            se.push_back(e.std_error);
        }
        t.add("rw_" + tag + "_mc", kPrice, mean);
        t.add("rw_" + tag + "_mc_se", kPrice, se);
    }
    return t.finish();
}

Table bermudan(const RunConfig& c) {
    std::vector<double> dates;
    const long count = std::lround(c.exercise_horizon * c.exercises_per_year);
    for (long k = 1; k <= count; ++k) dates.push_back(static_cast<double>(k) / c.exercises_per_year);
    TableBuilder t(c.strikes.size());
    t.add("strike", kPrice, c.strikes);
    if (c.wants(Method::Analytic)) {
        std::vector<double> v;
        for (double K : c.strikes)
            v.push_back(real_world_put(c.gop, c.savings_rate, {0.0, c.exercise_horizon, K, OptionKind::Put}));
        t.add("european_put_analytic", kPrice, v);
    }
    if (c.wants(Method::Rmq)) {
        const QuantGrid grid = gop_grid(c, c.exercise_horizon);
        std::vector<double> v;
        for (double K : c.strikes) v.push_back(bermudan_price_rmq(grid, c.savings_rate, {dates, K, OptionKind::Put}));
        t.add("bermudan_put_rmq", kPrice, v);
    }
    if (c.wants(Method::Mc)) {
        log(c, "least-squares monte carlo, " + std::to_string(c.mc_paths) + " paths");
        std::vector<double> mean, se;
        split(mc_bermudan_lsmc_strikes(c.gop, c.savings_rate, dates, c.strikes, OptionKind::Put, mc_config(c),
                                       c.lsmc_degree),
              mean, se);
        t.add("bermudan_put_lsmc", kPrice, mean);
        t.add("bermudan_put_lsmc_se", kPrice, se);
        if (t.has("bermudan_put_rmq"))
            t.add("rmq_lsmc_rel_gap", "fraction of the lsmc price", relative_error(t.get("bermudan_put_rmq"), mean));
    }
    return t.finish();
}

std::vector<double> rmq_curve_at(const JointQuantGrid& grid, const std::vector<double>& maturities) {
    std::vector<double> v;
    for (double T : maturities) v.push_back(hybrid_zcb_rmq(grid, T));
    return v;
}

Table bonds(const RunConfig& c, bool components) {
    const std::vector<double>& T = c.maturities;
    TableBuilder t(T.size());
    t.add("maturity", kYears, T);
    if (c.wants(Method::Analytic)) {
        std::vector<double> mpor, ir, fair;
        for (double m : T) {
            mpor.push_back(mpor_component(c.gop, 0.0, m));
            ir.push_back(ir_component_32(c.short_rate, 0.0, m));
            fair.push_back(mpor.back() * ir.back());
        }
        if (components) {
            t.add("mpor_component", kBond, mpor);
            t.add("ir_component", kBond, ir);
            t.add("classical_bond", kBond, ir);
        }
        t.add("fair_bond_analytic", kBond, fair);
        if (components) t.add("rn_rw_gap", "fraction of the classical bond", ratio_gap(ir, fair));
    }
    if (c.wants(Method::Rmq)) {
        const std::vector<double> v = rmq_curve_at(joint_grid(c, c.correlation, T.back()), T);
        t.add("fair_bond_rmq", kBond, v);
        if (t.has("fair_bond_analytic"))
            t.add("rmq_rel_error", kFraction, relative_error(v, t.get("fair_bond_analytic")));
    }
    if (c.wants(Method::Mc)) {
        log(c, "hybrid monte carlo, " + std::to_string(c.mc_paths) + " paths");
        std::vector<double> mean, se;
        split(mc_hybrid_zcb_curve(c.short_rate, c.gop, c.correlation, T, mc_config(c)), mean, se);
        t.add("fair_bond_mc", kBond, mean);
        t.add("fair_bond_mc_se", kBond, se);
        if (t.has("fair_bond_analytic"))
            t.add("mc_z", "standard errors", z_scores(mean, t.get("fair_bond_analytic"), se));
        if (t.has("fair_bond_rmq")) t.add("rmq_z", "standard errors", z_scores(t.get("fair_bond_rmq"), mean, se));
    }
    return t.finish();
}

Table correlation_sweep(const RunConfig& c) {
    const std::vector<double>& T = c.maturities;
    std::vector<double> rho_col, t_col;
    for (double rho : c.correlations)
        for (double m : T) {
            rho_col.push_back(rho);
            t_col.push_back(m);
        }
    TableBuilder t(rho_col.size());
    t.add("correlation", "", rho_col);
    t.add("maturity", kYears, t_col);
    const bool has_zero = std::count(c.correlations.begin(), c.correlations.end(), 0.0) > 0;
    // Deviations are measured against the same method at zero correlation.
    auto sweep = [&](auto price_curve, std::vector<double>& out, std::vector<double>& dev) {
        std::map<double, std::vector<double>> curves;
        for (double rho : c.correlations) curves[rho] = price_curve(rho);
        const std::vector<double> base = has_zero ? curves[0.0] : price_curve(0.0);
        for (double rho : c.correlations)
            for (std::size_t k = 0; k < T.size(); ++k) {
                out.push_back(curves[rho][k]);
                dev.push_back(curves[rho][k] / base[k] - 1.0);
            }
    };
    if (c.wants(Method::Analytic)) {
        std::vector<double> v;
        for (std::size_t r = 0; r < c.correlations.size(); ++r)
            for (double m : T) v.push_back(hybrid_zcb(c.gop, c.short_rate, 0.0, m));
        t.add("fair_bond_uncorrelated_analytic", kBond, v);
    }
    if (c.wants(Method::Rmq)) {
        std::vector<double> v, dev;
        sweep([&](double rho) { return rmq_curve_at(joint_grid(c, rho, T.back()), T); }, v, dev);
        t.add("fair_bond_rmq", kBond, v);
        t.add("rmq_rel_dev", "fraction of the uncorrelated price", dev);
    }
    if (c.wants(Method::Mc)) {
        std::vector<double> v, dev, se;
        std::map<double, std::vector<double>> errors;
        sweep(
            [&](double rho) {
                log(c, "hybrid monte carlo at correlation " + format_number(rho));
                std::vector<double> mean, s;
                split(mc_hybrid_zcb_curve(c.short_rate, c.gop, rho, T, mc_config(c)), mean, s);
                errors[rho] = s;
                return mean;
            },
            v, dev);
        for (double rho : c.correlations) se.insert(se.end(), errors[rho].begin(), errors[rho].end());
        t.add("fair_bond_mc", kBond, v);
        t.add("fair_bond_mc_se", kBond, se);
        t.add("mc_rel_dev", "fraction of the uncorrelated price", dev);
    }
    return t.finish();
}

std::vector<double> forward_strikes(const RunConfig& c, double forward) {
    std::vector<double> k;
    for (int i = 0; i < c.strike_count; ++i)
        k.push_back(forward * (c.forward_low + (c.forward_high - c.forward_low) * i / (c.strike_count - 1)));
    return k;
}

double fair_forward(const RunConfig& c) {
    return hybrid_zcb(c.gop, c.short_rate, 0.0, c.bond_maturity) / hybrid_zcb(c.gop, c.short_rate, 0.0, c.option_expiry);
}

Table bond_options(const RunConfig& c) {
    const double forward = fair_forward(c);
    const std::vector<double> strikes = forward_strikes(c, forward);
    TableBuilder t(strikes.size());
    t.add("strike", kBond, strikes);
    std::vector<double> multiple;
    for (double K : strikes) multiple.push_back(K / forward);
    t.add("strike_over_forward", "", multiple);
    if (c.wants(Method::Rmq)) {
        const JointQuantGrid grid = joint_grid(c, c.correlation, c.option_expiry);
        std::vector<double> v;
        for (double K : strikes)
            v.push_back(zcb_option_price_rmq(grid, c.short_rate, c.gop,
                                             {c.option_expiry, c.bond_maturity, K, OptionKind::Put}));
        t.add("put_rmq", kBond, v);
    }
    if (c.wants(Method::Mc)) {
        log(c, "hybrid monte carlo, " + std::to_string(c.mc_paths) + " paths");
        std::vector<double> mean, se;
        split(mc_zcb_option_strikes(c.short_rate, c.gop, c.correlation, c.option_expiry, c.bond_maturity, strikes,
                                    OptionKind::Put, mc_config(c)),
              mean, se);
        t.add("put_mc", kBond, mean);
        t.add("put_mc_se", kBond, se);
        if (t.has("put_rmq")) {
            t.add("rmq_mc_rel_gap", "fraction of the mc price", relative_error(t.get("put_rmq"), mean));
            t.add("rmq_z", "standard errors", z_scores(t.get("put_rmq"), mean, se));
        }
    }
    return t.finish();
}

Table bond_options_rn_vs_rw(const RunConfig& c) {
    const double forward = fair_forward(c);
    const std::vector<double> strikes = forward_strikes(c, forward);
    TableBuilder t(strikes.size());
    t.add("strike", kBond, strikes);
    if (c.wants(Method::Rmq)) {
        const JointQuantGrid grid = joint_grid(c, c.correlation, c.option_expiry);
        std::vector<double> rw_put, rn_put, rw_call, rn_call;
        for (double K : strikes) {
            const BondOptionComparison r =
                rn_bond_option_comparators(grid, c.short_rate, c.gop, c.option_expiry, c.bond_maturity, K);
            rw_put.push_back(r.rw_put);
            rn_put.push_back(r.rn_put);
            rw_call.push_back(r.rw_call);
            rn_call.push_back(r.rn_call);
        }
        t.add("rw_put_rmq", kBond, rw_put);
        t.add("rn_put_rmq", kBond, rn_put);
        t.add("rw_call_rmq", kBond, rw_call);
        t.add("rn_call_rmq", kBond, rn_call);
    }
    if (c.wants(Method::Mc)) {
        log(c, "hybrid monte carlo, " + std::to_string(c.mc_paths) + " paths");
        for (OptionKind kind : {OptionKind::Put, OptionKind::Call}) {
            std::vector<double> mean, se;
            split(mc_zcb_option_strikes(c.short_rate, c.gop, c.correlation, c.option_expiry, c.bond_maturity,
                                        strikes, kind, mc_config(c)),
                  mean, se);
            const std::string tag = kind == OptionKind::Put ? "rw_put_mc" : "rw_call_mc";
            t.add(tag, kBond, mean);
            t.add(tag + "_se", kBond, se);
        }
    }
    return t.finish();
}

json column_json(const Table& t) {
    json out = json::array();
    for (const Column& col : t.columns) out.push_back({{"name", col.name}, {"unit", col.unit}});
    return out;
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Writes next to the target, then renames over it.
std::filesystem::path write_temp(const std::filesystem::path& target, const std::string& text) {
    std::filesystem::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("cannot write " + tmp.string());
    }
    return tmp;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "fig1-eur-put-rn-vs-rw",     "fig2-call-surface-rmq-error", "fig3-bermudan-lsmc-vs-rmq",
        "fig4-zcb-rn-vs-rw",         "fig5-hybrid-zcb-mc-vs-rmq",   "fig6-correlation-sweep",
        "fig7-zcb-option-mc-vs-rmq", "fig8-zco-rn-vs-rw"};
    return names;
}

RunConfig parse_config(const json& config) {
    try {
        check_keys(config, "config",
                   {"experiment", "method", "output_dir", "seed", "gop", "savings_rate", "short_rate", "rmq", "mc",
                    "grid"});
        require_config(config.contains("experiment"), "config needs an 'experiment' name");
        RunConfig c = defaults_for(config.at("experiment").get<std::string>());
        if (config.contains("method")) c.method = parse_method(config.at("method").get<std::string>());
        if (config.contains("output_dir")) c.output_dir = config.at("output_dir").get<std::string>();
        read(config, "seed", c.seed);
        read(config, "savings_rate", c.savings_rate);
        if (config.contains("gop")) {
            const json& g = config.at("gop");
            check_keys(g, "gop", {"alpha0", "eta", "c", "a", "x0"});
            read(g, "alpha0", c.gop.alpha0);
            read(g, "eta", c.gop.eta);
            read(g, "c", c.gop.c);
            read(g, "a", c.gop.a);
            read(g, "x0", c.gop.x0);
        }
        if (config.contains("short_rate")) {
            const json& r = config.at("short_rate");
            check_keys(r, "short_rate", {"kappa", "theta", "sigma", "r0"});
            read(r, "kappa", c.short_rate.kappa);
            read(r, "theta", c.short_rate.theta);
            read(r, "sigma", c.short_rate.sigma);
            read(r, "r0", c.short_rate.r0);
        }
        if (config.contains("rmq")) {
            const json& q = config.at("rmq");
            check_keys(q, "rmq", {"scheme", "steps_per_year", "codewords", "rate_codewords", "gop_codewords"});
            if (q.contains("scheme")) {
                const std::string s = q.at("scheme").get<std::string>();
                require_config(s == "euler" || s == "higher-order", "rmq.scheme must be euler or higher-order");
                c.rmq_scheme = s == "euler" ? SchemeOrder::Euler : SchemeOrder::HigherOrder;
            }
            read(q, "steps_per_year", c.rmq_steps_per_year);
            read(q, "codewords", c.rmq_codewords);
            read(q, "rate_codewords", c.rmq_rate_codewords);
            read(q, "gop_codewords", c.rmq_gop_codewords);
        }
        if (config.contains("mc")) {
            const json& m = config.at("mc");
            check_keys(m, "mc", {"paths", "steps_per_year", "antithetic", "lsmc_degree"});
            read(m, "paths", c.mc_paths);
            read(m, "steps_per_year", c.mc_steps_per_year);
            read(m, "antithetic", c.mc_antithetic);
            read(m, "lsmc_degree", c.lsmc_degree);
        }
        if (config.contains("grid")) {
            const json& g = config.at("grid");
            check_keys(g, "grid",
                       {"maturities", "moneyness", "strikes", "correlations", "correlation", "exercise_horizon",
                        "exercises_per_year", "option_expiry", "bond_maturity", "forward_low", "forward_high",
                        "strike_count"});
            read(g, "maturities", c.maturities);
            read(g, "moneyness", c.moneyness);
            read(g, "strikes", c.strikes);
            read(g, "correlations", c.correlations);
            read(g, "correlation", c.correlation);
            read(g, "exercise_horizon", c.exercise_horizon);
            read(g, "exercises_per_year", c.exercises_per_year);
            read(g, "option_expiry", c.option_expiry);
            read(g, "bond_maturity", c.bond_maturity);
            read(g, "forward_low", c.forward_low);
            read(g, "forward_high", c.forward_high);
            read(g, "strike_count", c.strike_count);
        }
        validate(c);
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

json to_json(const RunConfig& c) {
    return {{"experiment", c.experiment},
            {"method", method_name(c.method)},
            {"output_dir", c.output_dir.string()},
            {"seed", c.seed},
            {"gop", {{"alpha0", c.gop.alpha0}, {"eta", c.gop.eta}, {"c", c.gop.c}, {"a", c.gop.a}, {"x0", c.gop.x0}}},
            {"savings_rate", c.savings_rate},
            {"short_rate",
             {{"kappa", c.short_rate.kappa},
              {"theta", c.short_rate.theta},
              {"sigma", c.short_rate.sigma},
              {"r0", c.short_rate.r0}}},
            {"rmq",
             {{"scheme", c.rmq_scheme == SchemeOrder::Euler ? "euler" : "higher-order"},
              {"steps_per_year", c.rmq_steps_per_year},
              {"codewords", c.rmq_codewords},
              {"rate_codewords", c.rmq_rate_codewords},
              {"gop_codewords", c.rmq_gop_codewords}}},
            {"mc",
             {{"paths", c.mc_paths},
              {"steps_per_year", c.mc_steps_per_year},
              {"antithetic", c.mc_antithetic},
              {"lsmc_degree", c.lsmc_degree}}},
            {"grid",
             {{"maturities", c.maturities},
              {"moneyness", c.moneyness},
              {"strikes", c.strikes},
              {"correlations", c.correlations},
              {"correlation", c.correlation},
              {"exercise_horizon", c.exercise_horizon},
              {"exercises_per_year", c.exercises_per_year},
              {"option_expiry", c.option_expiry},
              {"bond_maturity", c.bond_maturity},
              {"forward_low", c.forward_low},
              {"forward_high", c.forward_high},
              {"strike_count", c.strike_count}}}};
}

Table run_experiment(const RunConfig& c) {
    const std::string& e = c.experiment;
    if (e == "fig1-eur-put-rn-vs-rw") return vanilla_surface(c, OptionKind::Put);
    if (e == "fig2-call-surface-rmq-error") return vanilla_surface(c, OptionKind::Call);
    if (e == "fig3-bermudan-lsmc-vs-rmq") return bermudan(c);
    if (e == "fig4-zcb-rn-vs-rw") return bonds(c, true);
    if (e == "fig5-hybrid-zcb-mc-vs-rmq") return bonds(c, false);
    if (e == "fig6-correlation-sweep") return correlation_sweep(c);
    if (e == "fig7-zcb-option-mc-vs-rmq") return bond_options(c);
    if (e == "fig8-zco-rn-vs-rw") return bond_options_rn_vs_rw(c);
    throw ConfigError("unknown experiment '" + e + "'");
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
    return std::string(buf, result.ptr);
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i].name;
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
        out += "\n";
    }
    return out;
}

std::string version_string() { return BENCHPRICER_VERSION; }

void write_outputs(const RunConfig& c, const Table& table, double wall_seconds) {
    std::filesystem::create_directories(c.output_dir);
    const std::filesystem::path csv = c.output_dir / (c.experiment + ".csv");
    const std::filesystem::path manifest = c.output_dir / (c.experiment + ".manifest.json");
    const json meta{{"experiment", c.experiment},
                    {"version", version_string()},
                    {"seed", c.seed},
                    {"method", method_name(c.method)},
                    {"csv", csv.filename().string()},
                    {"rows", table.rows.size()},
                    {"columns", column_json(table)},
                    {"config", to_json(c)},
                    {"threads", worker_count()},
                    {"wall_time_seconds", wall_seconds},
                    {"finished_at_utc", utc_now()}};
    const std::filesystem::path csv_tmp = write_temp(csv, to_csv(table));
    std::filesystem::path meta_tmp;
    try {
        meta_tmp = write_temp(manifest, meta.dump(2) + "\n");
        std::filesystem::rename(csv_tmp, csv);
        std::filesystem::rename(meta_tmp, manifest);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(csv_tmp, ec);
        if (!meta_tmp.empty()) std::filesystem::remove(meta_tmp, ec);
        std::filesystem::remove(csv, ec);
        throw;
    }
}

int run_main(int argc, char** argv) {
    CLI::App app{"Real-world pricing experiments on the benchmark approach"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string method;
    CLI::App* run = app.add_subcommand("run", "Run one experiment from a JSON config");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    CLI::Option* seed_opt = run->add_option("--seed", seed, "Random seed (overrides seed)");
    run->add_option("--method", method, "analytic, rmq, mc or all")
        ->check(CLI::IsMember({"analytic", "rmq", "mc", "all"}));
    CLI::App* list = app.add_subcommand("list", "Print the registered experiment names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*list) {
        for (const std::string& name : experiment_names()) std::cout << name << "\n";
        return 0;
    }

    RunConfig config;
    try {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config file " + config_path);
        json j;
        try {
            j = json::parse(in, nullptr, true, true);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        if (!out_dir.empty()) j["output_dir"] = out_dir;
        if (*seed_opt) j["seed"] = seed;
        if (!method.empty()) j["method"] = method;
        config = parse_config(j);
    } catch (const ConfigError& e) {
        std::cerr << "benchpricer: config error: " << e.what() << "\n";
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    Table table;
    try {
        table = run_experiment(config);
    } catch (const ConfigError& e) {
        std::cerr << "benchpricer: config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "benchpricer: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        std::cerr << "benchpricer: numerical failure: " << e.what() << "\n";
        return 3;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        write_outputs(config, table, wall);
    } catch (const std::exception& e) {
        std::cerr << "benchpricer: cannot write outputs: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "[" << config.experiment << "] wrote " << table.rows.size() << " rows to "
              << (config.output_dir / (config.experiment + ".csv")).string() << " in " << format_number(wall) << " s\n";
    return 0;
}

}  // namespace benchpricer::cli
