#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace prmcc {

using Regressor = Eigen::VectorXd;

/// Transversal-filter input buffer x_N(n) = [x(n), x(n-1), ..., x(n-N+1)].
/// Starts zero-filled, so the first N-1 regressors are zero-prepadded.
class TappedDelayLine {
public:
    explicit TappedDelayLine(std::size_t taps) : x_(Regressor::Zero(static_cast<Eigen::Index>(taps))) {}

    void push(double sample)
    {
        const Eigen::Index n = x_.size();
        for (Eigen::Index i = n - 1; i > 0; --i) {
            x_[i] = x_[i - 1];
        }
        if (n > 0) {
            x_[0] = sample;
        }
    }

    void reset() { x_.setZero(); }

    const Regressor& regressor() const noexcept { return x_; }
    std::size_t taps() const noexcept { return static_cast<std::size_t>(x_.size()); }

private:
    Regressor x_;
};

}  // namespace prmcc
