#pragma once

#include <stdexcept>
#include <string>

namespace ctdelay {

/// Invalid parameters or inputs that violate a type invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical solver could not meet its convergence criterion.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Too few (or censored) Monte Carlo samples for the requested estimate.
class InsufficientSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A heuristic formula was evaluated outside the range where it is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace ctdelay
