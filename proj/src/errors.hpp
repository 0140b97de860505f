#pragma once

#include <stdexcept>
#include <string>

namespace rbdsde {

/// Violated precondition on a public operation (bad sizes, out-of-range
/// parameters, invalid lattice configuration).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A configuration file is missing a key or holds an unusable value.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Non-finite values, singular projections and similar numerical failures.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Brute-force oracle refused to run because the tree is too large.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs of a property check do not satisfy its hypotheses.
class HypothesisViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rbdsde
