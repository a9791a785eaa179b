#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace maxagg {

// Base class for domain errors raised by the library. Precondition
// violations on plain arguments use std::invalid_argument directly.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An ODE right-hand side was evaluated on its singular set.
class singular_point_error : public error {
public:
    using error::error;
};

// The adaptive integrator could not reach the requested endpoint. Carries
// the interval that was covered before the step size underflowed.
class convergence_failure : public error {
public:
    convergence_failure(const std::string& what, double reached_lo, double reached_hi)
        : error(what), reached_lo_(reached_lo), reached_hi_(reached_hi) {}

    double reached_lo() const noexcept { return reached_lo_; }
    double reached_hi() const noexcept { return reached_hi_; }

private:
    double reached_lo_;
    double reached_hi_;
};

// No solution branch exists in the requested parameter regime.
class no_branch_error : public error {
public:
    using error::error;
};

// A root bracket could not be established; carries the scanned range.
class bracket_failure : public error {
public:
    bracket_failure(const std::string& what, double scanned_lo, double scanned_hi)
        : error(what), scanned_lo_(scanned_lo), scanned_hi_(scanned_hi) {}

    double scanned_lo() const noexcept { return scanned_lo_; }
    double scanned_hi() const noexcept { return scanned_hi_; }

private:
    double scanned_lo_;
    double scanned_hi_;
};

// A state became unusable for further evolution (e.g. total number <= 0).
class degenerate_state_error : public error {
public:
    using error::error;
};

// An iteration exhausted its budget; carries the residual history.
class nonconvergence_error : public error {
public:
    nonconvergence_error(const std::string& what, std::vector<double> residual_history)
        : error(what), residual_history_(std::move(residual_history)) {}

    const std::vector<double>& residual_history() const noexcept { return residual_history_; }

private:
    std::vector<double> residual_history_;
};

// Not enough data to perform a fit or measurement.
class insufficient_data_error : public error {
public:
    using error::error;
};

} // namespace maxagg
