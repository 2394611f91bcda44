#pragma once

#include "prmcc/correntropy.hpp"
#include "prmcc/errors.hpp"
#include "prmcc/proportionate.hpp"
#include "prmcc/recursive_filter.hpp"
#include "prmcc/regressor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace prmcc {

/// Stochastic-gradient baselines. `sigma = kInfiniteBandwidth` gives LMS and
/// IPLMS; finite bandwidths give MCC and IPMCC.
struct GradientConfig {
    double mu = 6e-3;
    double sigma = kInfiniteBandwidth;
    double alpha = 0.0;     ///< proportionate variants only
    double epsilon = 1e-4;  ///< proportionate variants only
};

struct GradientState {
    Eigen::VectorXd w;
    GradientConfig params;
    std::uint64_t n = 0;
};

inline GradientState make_gradient_state(std::size_t taps, const GradientConfig& params)
{
    if (taps == 0) {
        throw std::invalid_argument("filter needs at least one tap");
    }
    if (!(params.mu > 0.0) || !std::isfinite(params.mu)) {
        throw std::invalid_argument("mu must be positive and finite");
    }
    if (!(params.sigma > 0.0)) {
        throw std::invalid_argument("sigma must be positive (or infinite)");
    }
    if (!(params.alpha >= -1.0 && params.alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in [-1, 1)");
    }
    if (!(params.epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
    GradientState s;
    s.w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(taps));
    s.params = params;
    return s;
}

namespace detail {

template <bool Proportionate>
StepOutput gradient_step(GradientState& state, const Regressor& x, double d)
{
    if (x.size() != state.w.size()) {
        throw std::invalid_argument("regressor length does not match filter taps");
    }
    StepOutput out;
    out.y = state.w.dot(x);
    out.e_prior = d - out.y;
    const double f = error_nonlinearity(out.e_prior, state.params.sigma);
    if constexpr (Proportionate) {
        // Unit-trace G: theta = 1.
        out.g = proportionate_gains(state.w, 1.0, state.params.alpha, state.params.epsilon);
        out.k = (state.params.mu * out.g.array() * x.array()).matrix();
    } else {
        out.g = Eigen::VectorXd::Ones(state.w.size());
        out.k = state.params.mu * x;
    }
    state.w += out.k * f;
    if (!state.w.allFinite()) {
        throw numerical_fault("weights are not finite at iteration " + std::to_string(state.n + 1));
    }
    ++state.n;
    out.e_post = d - state.w.dot(x);
    return out;
}

}  // namespace detail

/// w <- w + mu f(e) x. LMS when the bandwidth is infinite.
inline StepOutput mcc_step(GradientState& state, const Regressor& x, double d)
{
    return detail::gradient_step<false>(state, x, d);
}

inline StepOutput lms_step(GradientState& state, const Regressor& x, double d)
{
    if (!is_infinite_bandwidth(state.params.sigma)) {
        throw std::invalid_argument("lms_step requires an infinite kernel bandwidth");
    }
    return detail::gradient_step<false>(state, x, d);
}

/// w <- w + mu G(n-1) x f(e) with unit-trace proportionate gains.
/// IPLMS when the bandwidth is infinite.
inline StepOutput ipmcc_step(GradientState& state, const Regressor& x, double d)
{
    return detail::gradient_step<true>(state, x, d);
}

inline StepOutput iplms_step(GradientState& state, const Regressor& x, double d)
{
    if (!is_infinite_bandwidth(state.params.sigma)) {
        throw std::invalid_argument("iplms_step requires an infinite kernel bandwidth");
    }
    return detail::gradient_step<true>(state, x, d);
}

}  // namespace prmcc
