#pragma once

#include <stdexcept>
#include <string>

namespace gpvol {

/// Malformed input text (CSV rows, prefix expressions, config files).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a domain invariant (e.g. bid > ask).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent run configuration (schedule vs partition, bad probabilities).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The market price lies outside the range reachable by the pricing model.
class NoRootError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The companion option has (numerically) zero gamma or vega on a rebalance date.
class DegenerateHedgeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gpvol
