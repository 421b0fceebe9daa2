#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace errexp {

// Bad input: shapes, ranges, malformed distributions. Maps to CLI exit code 1.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A mathematical precondition failed (support mismatch, parameter out of range).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Enumeration or grid larger than the configured cap.
class CapExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

// A sequential test whose nominal drift has the wrong sign under the given truth.
class DriftSignError : public DomainError {
public:
    DriftSignError(int hypothesis, double drift, const std::string& what)
        : DomainError(what), hypothesis_(hypothesis), drift_(drift) {}
    int hypothesis() const noexcept { return hypothesis_; }
    double drift() const noexcept { return drift_; }

private:
    int hypothesis_;
    double drift_;
};

// Iterative solver gave up. Carries the best point seen and its residual so
// callers can decide whether to salvage it. Maps to CLI exit code 2.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<double> best, double residual)
        : std::runtime_error(what), best_(std::move(best)), residual_(residual) {}
    const std::vector<double>& best_iterate() const noexcept { return best_; }
    double residual() const noexcept { return residual_; }

private:
    std::vector<double> best_;
    double residual_;
};

}  // namespace errexp
