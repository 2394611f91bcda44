#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace prmcc {

/// Diagonal of the proportionate matrix G for the current weight estimate:
///
///   g_k = theta (1 - alpha) / (2N) + theta (1 + alpha) |w_k| / (2 ||w||_1 + epsilon)
///
/// alpha = -1 gives the uniform gain theta / N; alpha -> 1 allocates nearly
/// all of the trace to the large taps. epsilon keeps the all-zero start finite.
inline Eigen::VectorXd proportionate_gains(const Eigen::VectorXd& w, double theta, double alpha,
                                           double epsilon)
{
    if (!(theta > 0.0)) {
        throw std::invalid_argument("proportionate_gains: theta must be positive");
    }
    if (!(alpha >= -1.0 && alpha < 1.0)) {
        throw std::invalid_argument("proportionate_gains: alpha must lie in [-1, 1)");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("proportionate_gains: epsilon must be positive");
    }
    const auto n = static_cast<double>(w.size());
    const double uniform = theta * (1.0 - alpha) / (2.0 * n);
    const double scale = theta * (1.0 + alpha) / (2.0 * w.lpNorm<1>() + epsilon);
    return (uniform + scale * w.array().abs()).matrix();
}

}  // namespace prmcc
