#pragma once

#include <stdexcept>
#include <string>

namespace prmcc {

/// A recursion produced a non-finite value (weights, inverse correlation
/// matrix, or a gain denominator).
class numerical_fault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A closed-form predictor was asked to evaluate outside the regime where
/// its denominators are positive or its contraction is stable.
class invalid_regime : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inputs that make a formula undefined, e.g. an all-zero weight vector
/// when the proportionate term is active.
class degenerate_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Experiment configuration failed validation. `field()` names the
/// offending entry using a dotted path such as `noise.variance`.
class config_error : public std::invalid_argument {
public:
    config_error(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace prmcc
