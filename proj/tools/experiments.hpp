#pragma once

// Batch experiments behind the benchpricer command line. A run reads a JSON
// config, fills in per-experiment defaults, computes one table and writes it
// as CSV next to a JSON manifest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "benchpricer/models.hpp"
#include "benchpricer/quantize.hpp"

namespace benchpricer::cli {

enum class Method { Analytic, Rmq, Mc, All };

struct RunConfig {
    std::string experiment;
    Method method = Method::All;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 1;

    TcevParams gop;
    double savings_rate = 0.05;
    Rate32Params short_rate;

    SchemeOrder rmq_scheme = SchemeOrder::HigherOrder;
    int rmq_steps_per_year = 12;
    int rmq_codewords = 100;       // single-factor grids
    int rmq_rate_codewords = 50;   // joint grids
    int rmq_gop_codewords = 200;

    std::int64_t mc_paths = 100000;
    int mc_steps_per_year = 12;
    bool mc_antithetic = false;
    int lsmc_degree = 3;

    std::vector<double> maturities;    // years
    std::vector<double> moneyness;     // strike over the initial GOP value
    std::vector<double> strikes;       // absolute, Bermudan puts
    std::vector<double> correlations;  // correlation sweep
    double correlation = 0.0;          // every other hybrid experiment
    double exercise_horizon = 5.0;
    int exercises_per_year = 12;
    double option_expiry = 10.0;      // bond options
    double bond_maturity = 15.0;
    double forward_low = 0.5;         // bond option strikes as multiples of the fair forward bond
    double forward_high = 1.5;
    int strike_count = 20;

    bool wants(Method m) const { return method == Method::All || method == m; }
};

/// Registered experiment names in a fixed order.
const std::vector<std::string>& experiment_names();

/// Defaults for the experiment named in `config`, then the config's values on
/// top. Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& config);

/// Fully resolved config as JSON; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& config);

struct Column {
    std::string name;
    std::string unit;
};

struct Table {
    std::vector<Column> columns;
    std::vector<std::vector<double>> rows;
};

/// Runs the experiment. Numerical failures surface as DomainError or
/// ConvergenceError; a method selection with nothing to compute is a ConfigError.
Table run_experiment(const RunConfig& config);

/// CSV text: header row then one line per row, 12 significant digits.
std::string to_csv(const Table& table);

/// 12 significant digits, "." as decimal point whatever the locale.
std::string format_number(double value);

/// Writes <dir>/<experiment>.csv and <dir>/<experiment>.manifest.json through
/// temporary files renamed into place, so a failed run leaves neither.
void write_outputs(const RunConfig& config, const Table& table, double wall_seconds);

std::string version_string();

/// Whole command line; returns the process exit code.
int run_main(int argc, char** argv);

}  // namespace benchpricer::cli
