#pragma once

#include "prmcc/correntropy.hpp"
#include "prmcc/recursive_filter.hpp"
#include "prmcc/regressor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace prmcc {

/// Mixing-layer hyperparameters of the convex combination.
struct CombinerConfig {
    double mu_b = 50.0;
    double sigma_b = 2.0;
    double b_plus = 4.0;
    double beta = 0.999;  ///< share of w2 kept on transfer
    double gamma = 2.0;   ///< transfer fires when e2^2 / e^2 > gamma
    bool transfer_enabled = true;
};

/// Two PRMCC filters sharing lambda, delta, sigma, alpha and epsilon but with
/// trace controllers theta1 >= theta2 (component 1 is the fast filter),
/// plus the mixing state b.
struct CombinerState {
    FilterState f1;
    FilterState f2;
    double b = 0.0;
    CombinerConfig params;

    double rho_plus() const;
};

/// rho = sgm(b) = 1 / (1 + exp(-b)).
inline double mixing_parameter(double b) noexcept { return 1.0 / (1.0 + std::exp(-b)); }

inline double CombinerState::rho_plus() const { return mixing_parameter(params.b_plus); }

inline CombinerState make_combiner_state(std::size_t taps, const RecursiveConfig& shared,
                                         double theta1, double theta2, const CombinerConfig& mix)
{
    if (!(theta1 >= theta2)) {
        throw std::invalid_argument("combiner expects theta1 >= theta2 (fast filter first)");
    }
    if (!(mix.mu_b >= 0.0) || !std::isfinite(mix.mu_b)) {
        throw std::invalid_argument("mu_b must be non-negative and finite");
    }
    if (!(mix.sigma_b > 0.0)) {
        throw std::invalid_argument("sigma_b must be positive");
    }
    if (!(mix.b_plus > 0.0) || !std::isfinite(mix.b_plus)) {
        throw std::invalid_argument("b_plus must be positive and finite");
    }
    if (!(mix.beta >= 0.0 && mix.beta < 1.0)) {
        throw std::invalid_argument("beta must lie in [0, 1)");
    }
    if (!(mix.gamma > 1.0)) {
        throw std::invalid_argument("gamma must exceed 1");
    }
    RecursiveConfig c1 = shared;
    c1.theta = theta1;
    RecursiveConfig c2 = shared;
    c2.theta = theta2;
    CombinerState s{make_filter_state(taps, c1), make_filter_state(taps, c2), 0.0, mix};
    return s;
}

/// b <- clamp(b + mu_b kappa_b(e) e (y1 - y2) rho (1 - rho), [-b+, b+]).
inline double update_b(const CombinerState& state, double e_prior, double y1, double y2, double rho)
{
    const double step = state.params.mu_b * mcc_weight(e_prior, state.params.sigma_b) * e_prior *
                        (y1 - y2) * rho * (1.0 - rho);
    return std::clamp(state.b + step, -state.params.b_plus, state.params.b_plus);
}

struct CombinerOutput {
    double y = 0.0;        ///< rho y1 + (1 - rho) y2
    double e_prior = 0.0;  ///< d - y
    double rho = 0.5;      ///< sgm(b(n-1)), used for both the output and the weights
    bool transferred = false;
    StepOutput first;
    StepOutput second;
    Eigen::VectorXd w;  ///< rho w1(n) + (1 - rho) w2(n)
};

/// One CPRMCC iteration. Component errors are the a priori errors of each
/// filter; the transfer test compares them against the overall a priori error
/// before either component moves. A zero overall error never triggers.
inline CombinerOutput cprmcc_step(CombinerState& state, const Regressor& x, double d)
{
    CombinerOutput out;
    const double y1 = state.f1.w.dot(x);
    const double y2 = state.f2.w.dot(x);
    out.rho = mixing_parameter(state.b);
    out.y = out.rho * y1 + (1.0 - out.rho) * y2;
    out.e_prior = d - out.y;
    state.b = update_b(state, out.e_prior, y1, y2, out.rho);

    const double e2 = d - y2;
    const bool transfer = state.params.transfer_enabled && out.e_prior != 0.0 &&
                          (e2 * e2) / (out.e_prior * out.e_prior) > state.params.gamma;

    out.first = prmcc_step(state.f1, x, d);
    out.second = prmcc_step(state.f2, x, d);
    if (transfer) {
        const double beta = state.params.beta;
        state.f2.w = beta * state.f2.w + (1.0 - beta) * state.f1.w;
        out.second.e_post = d - state.f2.w.dot(x);
        out.transferred = true;
    }
    out.w = out.rho * state.f1.w + (1.0 - out.rho) * state.f2.w;
    return out;
}

}  // namespace prmcc
