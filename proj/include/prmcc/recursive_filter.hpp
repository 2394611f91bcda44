#pragma once

#include "prmcc/correntropy.hpp"
#include "prmcc/errors.hpp"
#include "prmcc/proportionate.hpp"
#include "prmcc/regressor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace prmcc {

/// Hyperparameters shared by the recursive correntropy family.
///
/// `sigma = kInfiniteBandwidth` selects the least-squares limit (RLS, PRLS).
/// `theta`, `alpha` and `epsilon` only matter for the proportionate step.
struct RecursiveConfig {
    double lambda = 0.995;  ///< forgetting factor, (0, 1]
    double delta = 100.0;   ///< P(0) = I / delta
    double sigma = kInfiniteBandwidth;
    double theta = 1.0;     ///< trace controller of G
    double alpha = 0.0;     ///< proportionality mix, [-1, 1)
    double epsilon = 1e-4;  ///< guards ||w||_1 = 0
};

inline void validate(const RecursiveConfig& c)
{
    if (!(c.lambda > 0.0 && c.lambda <= 1.0)) {
        throw std::invalid_argument("lambda must lie in (0, 1]");
    }
    if (!(c.delta > 0.0) || !std::isfinite(c.delta)) {
        throw std::invalid_argument("delta must be positive and finite");
    }
    if (!(c.sigma > 0.0)) {
        throw std::invalid_argument("sigma must be positive (or infinite)");
    }
    if (!(c.theta > 0.0) || !std::isfinite(c.theta)) {
        throw std::invalid_argument("theta must be positive and finite");
    }
    if (!(c.alpha >= -1.0 && c.alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in [-1, 1)");
    }
    if (!(c.epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
}

/// State of one recursive filter: weights w(n), inverse weighted
/// autocorrelation P(n), hyperparameters and the iteration counter.
struct FilterState {
    Eigen::VectorXd w;
    Eigen::MatrixXd P;
    RecursiveConfig params;
    std::uint64_t n = 0;

    std::size_t taps() const noexcept { return static_cast<std::size_t>(w.size()); }
};

/// w(0) = 0, P(0) = I / delta.
inline FilterState make_filter_state(std::size_t taps, const RecursiveConfig& params)
{
    if (taps == 0) {
        throw std::invalid_argument("filter needs at least one tap");
    }
    validate(params);
    const auto n = static_cast<Eigen::Index>(taps);
    FilterState s;
    s.w = Eigen::VectorXd::Zero(n);
    s.P = Eigen::MatrixXd::Identity(n, n) / params.delta;
    s.params = params;
    return s;
}

struct StepOutput {
    double e_prior = 0.0;  ///< d - w(n-1)^T x
    double e_post = 0.0;   ///< d - w(n)^T x
    double y = 0.0;        ///< w(n-1)^T x
    Eigen::VectorXd k;     ///< gain vector k(n)
    Eigen::VectorXd g;     ///< diagonal of G(n-1); all ones without proportionate updating
};

/// k(n) = P(n-1) x / (lambda + kappa(e) x^T P(n-1) x) with kappa the kernel weight
/// of the a priori error.
inline Eigen::VectorXd gain_vector(const FilterState& state, const Regressor& x, double e_prior)
{
    const Eigen::VectorXd px = state.P.selfadjointView<Eigen::Lower>() * x;
    const double denom = state.params.lambda + mcc_weight(e_prior, state.params.sigma) * x.dot(px);
    if (!std::isfinite(denom)) {
        throw numerical_fault("gain denominator is not finite");
    }
    return px / denom;
}

namespace detail {

/// Lower-triangle update from a precomputed px = P(n-1) x, mirrored to the upper half.
inline void update_P_from(FilterState& state, const Eigen::VectorXd& k, const Eigen::VectorXd& px, double kappa)
{
    // Symmetric part of k (P x)^T.
    state.P.selfadjointView<Eigen::Lower>().rankUpdate(k, px, -0.5 * kappa);

    const double inv_lambda = 1.0 / state.params.lambda;
    const Eigen::Index n = state.P.rows();
    double checksum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            state.P(i, j) *= inv_lambda;
            checksum += state.P(i, j);
        }
    }
    // Any inf or nan entry poisons the sum.
    if (!std::isfinite(checksum)) {
        throw numerical_fault("inverse correlation matrix is not finite");
    }
    state.P.triangularView<Eigen::StrictlyUpper>() = state.P.transpose();
}

}  // namespace detail

/// P(n) = lambda^-1 [P(n-1) - kappa(e) k(n) x^T P(n-1)], symmetrised in place.
///
/// The kernel weight uses the a priori error, the same one entering k(n), so
/// that k(n) = P(n) x holds after the update.
inline void update_P(FilterState& state, const Regressor& x, const Eigen::VectorXd& k, double e_prior)
{
    const Eigen::VectorXd px = state.P.selfadjointView<Eigen::Lower>() * x;
    detail::update_P_from(state, k, px, mcc_weight(e_prior, state.params.sigma));
}

namespace detail {

template <bool Proportionate>
StepOutput recursive_step(FilterState& state, const Regressor& x, double d)
{
    if (x.size() != state.w.size()) {
        throw std::invalid_argument("regressor length does not match filter taps");
    }
    StepOutput out;
    out.y = state.w.dot(x);
    out.e_prior = d - out.y;
    const double kappa = mcc_weight(out.e_prior, state.params.sigma);
    const Eigen::VectorXd px = state.P.selfadjointView<Eigen::Lower>() * x;
    const double denom = state.params.lambda + kappa * x.dot(px);
    if (!std::isfinite(denom)) {
        throw numerical_fault("gain denominator is not finite");
    }
    out.k = px / denom;
    if constexpr (Proportionate) {
        out.g = proportionate_gains(state.w, state.params.theta, state.params.alpha,
                                    state.params.epsilon);
    } else {
        out.g = Eigen::VectorXd::Ones(state.w.size());
    }
    const double f = error_nonlinearity(out.e_prior, state.params.sigma);
    if constexpr (Proportionate) {
        state.w.array() += out.g.array() * out.k.array() * f;
    } else {
        state.w += out.k * f;
    }
    if (!state.w.allFinite()) {
        throw numerical_fault("weights are not finite at iteration " + std::to_string(state.n + 1));
    }
    update_P_from(state, out.k, px, kappa);
    ++state.n;
    out.e_post = d - state.w.dot(x);
    return out;
}

}  // namespace detail

/// One PRMCC iteration:
///   e(n|n-1) -> k(n) -> G(n-1) from w(n-1) -> f(e) -> w(n) = w(n-1) + G k f -> P(n).
/// With an infinite bandwidth this is the PRLS recursion.
inline StepOutput prmcc_step(FilterState& state, const Regressor& x, double d)
{
    return detail::recursive_step<true>(state, x, d);
}

/// One RMCC iteration (PRMCC with G = I). With an infinite bandwidth this is RLS.
inline StepOutput rmcc_step(FilterState& state, const Regressor& x, double d)
{
    return detail::recursive_step<false>(state, x, d);
}

}  // namespace prmcc
