#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace benchpricer {

/// Raised when an argument violates an operation's precondition.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an iterative numerical method fails its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Codeword optimizer failure; carries the last iterate for inspection.
class QuantizationError : public ConvergenceError {
public:
    QuantizationError(const std::string& what, std::vector<double> last_grid,
                      double gradient_norm, int step = -1)
        : ConvergenceError(what),
          last_grid_(std::move(last_grid)),
          gradient_norm_(gradient_norm),
          step_(step) {}

    const std::vector<double>& last_grid() const noexcept { return last_grid_; }
    double gradient_norm() const noexcept { return gradient_norm_; }
    /// Time-step index at which the failure occurred, or -1 if unknown.
    int step() const noexcept { return step_; }

private:
    std::vector<double> last_grid_;
    double gradient_norm_;
    int step_;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const char* message) {
    if (!condition) throw DomainError(message);
}

}  // namespace detail
}  // namespace benchpricer
