#pragma once

// Closed-form first- and second-order predictors for PRMCC and for the convex
// combination of two PRMCC filters. All formulas come from a small-noise Taylor
// expansion of the kernel weight around the noise, so every result carries the
// validity warnings of that expansion alongside its value.

#include "prmcc/correntropy.hpp"
#include "prmcc/errors.hpp"
#include "prmcc/noise.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace prmcc::theory {

using Warnings = std::vector<std::string>;

struct TheoryInputs {
    Eigen::VectorXd w_true;  ///< true (or nominal) weights; also E[h(0)] for a zero start
    double lambda = 0.995;
    double theta = 1.0;
    double alpha = 0.0;
    double sigma = kInfiniteBandwidth;
    double sigma_x2 = 1.0;
    MomentSet moments;
    double sigma_q2 = 0.0;              ///< random-walk increment variance
    double c = 0.0;                     ///< target error norm for the iteration bound
    std::optional<double> h0_norm;      ///< ||E[h(0)]||_2, defaults to ||w_true||_2

    std::size_t taps() const noexcept { return static_cast<std::size_t>(w_true.size()); }
};

inline void validate(const TheoryInputs& in)
{
    if (in.w_true.size() == 0) {
        throw std::invalid_argument("w_true must not be empty");
    }
    if (!(in.lambda > 0.0 && in.lambda <= 1.0)) {
        throw std::invalid_argument("lambda must lie in (0, 1]");
    }
    if (!(in.theta > 0.0)) {
        throw std::invalid_argument("theta must be positive");
    }
    if (!(in.alpha >= -1.0 && in.alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in [-1, 1)");
    }
    if (!(in.sigma > 0.0)) {
        throw std::invalid_argument("sigma must be positive (or infinite)");
    }
    if (!(in.sigma_x2 > 0.0)) {
        throw std::invalid_argument("sigma_x2 must be positive");
    }
    if (!(in.sigma_q2 >= 0.0)) {
        throw std::invalid_argument("sigma_q2 must be non-negative");
    }
}

// ---------------------------------------------------------------------------
// Building blocks

/// Normalised steady-state proportionate profile
///   t_i = (1 - alpha) / (2N) + (1 + alpha) |w_i| / (2 ||w||_1),
/// so that the mean gains are g_i = theta t_i and sum(t) = 1.
inline Eigen::VectorXd sparsity_profile(const Eigen::VectorXd& w_true, double alpha)
{
    const auto n = static_cast<double>(w_true.size());
    if (w_true.size() == 0) {
        throw degenerate_input("sparsity profile of an empty weight vector");
    }
    const double l1 = w_true.lpNorm<1>();
    if (alpha == -1.0) {
        return Eigen::VectorXd::Constant(w_true.size(), 1.0 / n);
    }
    if (!(l1 > 0.0)) {
        throw degenerate_input("sparsity profile needs ||w||_1 > 0 when alpha > -1");
    }
    return ((1.0 - alpha) / (2.0 * n) + (1.0 + alpha) * w_true.array().abs() / (2.0 * l1)).matrix();
}

/// Noise-moment corrections of the Taylor-expanded kernel:
///   T1 = 1 - m2/2s^2 + m4/8s^4        (mean kernel weight)
///   T2 = 1 - 3m2/2s^2 + 5m4/8s^4
///   T3 = m2 - m4/s^2 + m6/2s^4        (noise power seen through f^2)
///   T4 = 1 - 6m2/s^2 + 15m4/2s^4
///   T5 = m2 - m4/s^2 + m6/4s^4        (cross terms of two filters)
///   T6 = 1 - 3m2/s^2 + 9m4/4s^4
struct TaylorTerms {
    double t1 = 1.0;
    double t2 = 1.0;
    double t3 = 0.0;
    double t4 = 1.0;
    double t5 = 0.0;
    double t6 = 1.0;
    Warnings warnings;
};

inline TaylorTerms taylor_terms(const MomentSet& m, double sigma)
{
    TaylorTerms t;
    if (is_infinite_bandwidth(sigma)) {
        t.t3 = m.m2;
        t.t5 = m.m2;
        return t;
    }
    const double s2 = sigma * sigma;
    const double s4 = s2 * s2;
    t.t1 = 1.0 - m.m2 / (2.0 * s2) + m.m4 / (8.0 * s4);
    t.t2 = 1.0 - 3.0 * m.m2 / (2.0 * s2) + 5.0 * m.m4 / (8.0 * s4);
    t.t3 = m.m2 - m.m4 / s2 + m.m6 / (2.0 * s4);
    t.t4 = 1.0 - 6.0 * m.m2 / s2 + 15.0 * m.m4 / (2.0 * s4);
    t.t5 = m.m2 - m.m4 / s2 + m.m6 / (4.0 * s4);
    t.t6 = 1.0 - 3.0 * m.m2 / s2 + 9.0 * m.m4 / (4.0 * s4);

    const double ratio = m.m2 / (2.0 * s2);
    if (ratio > 0.5) {
        std::ostringstream os;
        os << "taylor: noise power is large against the kernel bandwidth (m2/(2 sigma^2) = " << ratio
           << " > 0.5)";
        t.warnings.push_back(os.str());
    }
    const auto check = [&](double v, const char* name) {
        if (!(v > 0.0)) {
            t.warnings.push_back(std::string("taylor: ") + name + " is not positive");
        }
    };
    check(t.t1, "T1");
    check(t.t2, "T2");
    check(t.t4, "T4");
    return t;
}

inline double theta_12(double theta1, double theta2) { return theta1 * theta2 / (theta1 + theta2); }

// ---------------------------------------------------------------------------
// First order: mean weight error and stability

struct MeanTrajectory {
    Eigen::VectorXd h;
    Warnings warnings;
};

/// E[h(n)] ~ (I - (1 - lambda) (T2/T1) G)^n E[h(0)], taking E[h(0)] = w_true.
inline MeanTrajectory mean_error_trajectory(const TheoryInputs& in, unsigned long n)
{
    validate(in);
    const TaylorTerms tt = taylor_terms(in.moments, in.sigma);
    const Eigen::VectorXd g = in.theta * sparsity_profile(in.w_true, in.alpha);
    const double c = (1.0 - in.lambda) * tt.t2 / tt.t1;
    MeanTrajectory out{in.w_true, tt.warnings};
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        out.h[i] *= std::pow(1.0 - c * g[i], static_cast<double>(n));
    }
    return out;
}

struct ScalarPrediction {
    double value = 0.0;
    Warnings warnings;
};

/// Largest theta for which the mean recursion contracts:
///   2 T1 / ((1 - lambda) T2 ((1 - alpha)/2N + (1 + alpha) ||w||_inf / 2||w||_1)).
inline ScalarPrediction stability_bound_theta(const TheoryInputs& in)
{
    validate(in);
    const TaylorTerms tt = taylor_terms(in.moments, in.sigma);
    if (!(tt.t2 > 0.0) || !(tt.t1 > 0.0)) {
        throw invalid_regime("stability bound is meaningless: T1 or T2 is not positive");
    }
    const auto n = static_cast<double>(in.taps());
    double peak = (1.0 - in.alpha) / (2.0 * n);
    if (in.alpha != -1.0) {
        const double l1 = in.w_true.lpNorm<1>();
        if (!(l1 > 0.0)) {
            throw degenerate_input("stability bound needs ||w||_1 > 0 when alpha > -1");
        }
        peak += (1.0 + in.alpha) * in.w_true.lpNorm<Eigen::Infinity>() / (2.0 * l1);
    }
    return {2.0 * tt.t1 / ((1.0 - in.lambda) * tt.t2 * peak), tt.warnings};
}

/// Spectral norm of the diagonal mean-error contraction matrix.
inline double contraction_norm(const TheoryInputs& in, const TaylorTerms& tt)
{
    const Eigen::VectorXd g = in.theta * sparsity_profile(in.w_true, in.alpha);
    const double c = (1.0 - in.lambda) * tt.t2 / tt.t1;
    return (1.0 - c * g.array()).abs().maxCoeff();
}

/// Iterations after which ||E[h(n)]||_2 is guaranteed below `c`:
///   (ln c - ln ||E[h(0)]||_2) / ln ||I - (1 - lambda)(T2/T1) G||_2.
inline ScalarPrediction iterations_to_steady_state(const TheoryInputs& in)
{
    validate(in);
    const TaylorTerms tt = taylor_terms(in.moments, in.sigma);
    const double h0 = in.h0_norm.value_or(in.w_true.norm());
    if (!(in.c > 0.0) || !(in.c <= h0)) {
        throw std::invalid_argument("target error c must satisfy 0 < c <= ||E[h(0)]||_2");
    }
    const double rate = contraction_norm(in, tt);
    if (!(rate < 1.0)) {
        throw invalid_regime("mean weight error does not converge (contraction norm >= 1)");
    }
    if (in.c == h0) {
        return {0.0, tt.warnings};
    }
    return {std::max(0.0, (std::log(in.c) - std::log(h0)) / std::log(rate)), tt.warnings};
}

// ---------------------------------------------------------------------------
// Second order: steady-state mean-square deviation

struct MsdPrediction {
    Eigen::VectorXd per_tap;
    double total = 0.0;
    Warnings warnings;
};

struct TrackingPrediction {
    Eigen::VectorXd per_tap;
    double total = 0.0;       ///< per-tap formula summed
    double simplified = 0.0;  ///< aggregate form that drops the g_i T4 term
    Warnings warnings;
};

namespace detail {

inline Eigen::VectorXd mean_gains(const TheoryInputs& in)
{
    return in.theta * sparsity_profile(in.w_true, in.alpha);
}

inline TrackingPrediction per_tap_msd(const TheoryInputs& in, const Eigen::VectorXd& g,
                                      const TaylorTerms& tt)
{
    if (g.size() != in.w_true.size()) {
        throw std::invalid_argument("gain vector length does not match w_true");
    }
    const double one_minus_lambda = 1.0 - in.lambda;
    if (in.sigma_q2 > 0.0 && !(one_minus_lambda > 0.0)) {
        throw invalid_regime("tracking MSD needs lambda < 1");
    }
    TrackingPrediction out;
    out.per_tap.resize(g.size());
    out.warnings = tt.warnings;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        double num = one_minus_lambda * g[i] * tt.t3 / (in.sigma_x2 * tt.t1);
        if (in.sigma_q2 > 0.0) {
            num += in.sigma_q2 * tt.t1 / (one_minus_lambda * g[i]);
        }
        const double den = 2.0 * tt.t2 - one_minus_lambda * g[i] * tt.t4 / tt.t1;
        if (!(den > 0.0)) {
            std::ostringstream os;
            os << "steady-state MSD denominator is not positive at tap " << i << " (" << den << ")";
            throw invalid_regime(os.str());
        }
        out.per_tap[i] = num / den;
    }
    out.total = out.per_tap.sum();
    return out;
}

}  // namespace detail

/// Stationary per-tap K_i(inf) and their sum for explicit mean gains g_i:
///   K_i = [(1-lambda) g_i T3 / (sigma_x^2 T1)] / [2 T2 - (1-lambda) g_i T4 / T1].
inline MsdPrediction msd_stationary(const TheoryInputs& in, const Eigen::VectorXd& gains)
{
    validate(in);
    TheoryInputs stationary = in;
    stationary.sigma_q2 = 0.0;
    const TaylorTerms tt = taylor_terms(in.moments, in.sigma);
    auto r = detail::per_tap_msd(stationary, gains, tt);
    return {std::move(r.per_tap), r.total, std::move(r.warnings)};
}

/// Stationary MSD with g_i = theta t_i.
inline MsdPrediction msd_stationary(const TheoryInputs& in)
{
    validate(in);
    return msd_stationary(in, detail::mean_gains(in));
}

/// Random-walk steady state: each numerator gains sigma_q^2 T1 / ((1-lambda) g_i).
/// `simplified` is the aggregate
///   [(1-lambda) theta T3/(sigma_x^2 T1) + sigma_q^2 T1 sum(1/t_i) / ((1-lambda) theta)] / (2 T2).
inline TrackingPrediction msd_tracking(const TheoryInputs& in)
{
    validate(in);
    const TaylorTerms tt = taylor_terms(in.moments, in.sigma);
    const Eigen::VectorXd t = sparsity_profile(in.w_true, in.alpha);
    TrackingPrediction out = detail::per_tap_msd(in, in.theta * t, tt);
    const double one_minus_lambda = 1.0 - in.lambda;
    double num = one_minus_lambda * in.theta * tt.t3 / (in.sigma_x2 * tt.t1);
    if (in.sigma_q2 > 0.0) {
        num += in.sigma_q2 * tt.t1 * t.cwiseInverse().sum() / (one_minus_lambda * in.theta);
    }
    out.simplified = num / (2.0 * tt.t2);
    return out;
}

/// Aggregate tracking MSD only; convenient for sweeps and optimisation checks.
inline double msd_tracking_simplified(const TheoryInputs& in) { return msd_tracking(in).simplified; }

// Closed forms of the limiting algorithms, written out from the raw moments so
// they can be checked against the general per-tap expression.

/// RMCC (G = I).
inline double msd_rmcc(const TheoryInputs& in)
{
    validate(in);
    const double n = static_cast<double>(in.taps());
    const double m2 = in.moments.m2;
    const double m4 = in.moments.m4;
    const double m6 = in.moments.m6;
    const double s2 = in.sigma * in.sigma;
    const double s4 = s2 * s2;
    const double l = 1.0 - in.lambda;
    if (is_infinite_bandwidth(in.sigma)) {
        return n * l * m2 / (2.0 * in.sigma_x2 - l * in.sigma_x2);
    }
    const double kernel = 1.0 - m2 / (2.0 * s2) + m4 / (8.0 * s4);
    const double num = n * l * (m2 - m4 / s2 + m6 / (2.0 * s4)) / (in.sigma_x2 * kernel);
    const double den = 2.0 - 3.0 * m2 / s2 + 5.0 * m4 / (4.0 * s4) -
                       l * (1.0 - 6.0 * m2 / s2 + 15.0 * m4 / (2.0 * s4)) / kernel;
    if (!(den > 0.0)) {
        throw invalid_regime("RMCC MSD denominator is not positive");
    }
    return num / den;
}

/// PRLS: sum_i (1-lambda) g_i sigma_v^2 / (2 sigma_x^2 - (1-lambda) g_i sigma_x^2), g_i = theta t_i.
inline double msd_prls(const TheoryInputs& in)
{
    validate(in);
    const Eigen::VectorXd g = detail::mean_gains(in);
    const double l = 1.0 - in.lambda;
    double total = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double den = 2.0 * in.sigma_x2 - l * g[i] * in.sigma_x2;
        if (!(den > 0.0)) {
            throw invalid_regime("PRLS MSD denominator is not positive");
        }
        total += l * g[i] * in.moments.m2 / den;
    }
    return total;
}

/// RLS: N (1-lambda) sigma_v^2 / (2 sigma_x^2 - (1-lambda) sigma_x^2).
inline double msd_rls(const TheoryInputs& in)
{
    validate(in);
    const double n = static_cast<double>(in.taps());
    const double l = 1.0 - in.lambda;
    return n * l * in.moments.m2 / (2.0 * in.sigma_x2 - l * in.sigma_x2);
}

// ---------------------------------------------------------------------------
// Optimal tracking parameters

struct OptimalParameters {
    double theta_opt = 0.0;  ///< minimiser of the aggregate tracking MSD at fixed lambda
    double lambda_opt = 0.0; ///< minimiser at fixed theta
    bool lambda_opt_in_range = true;
    Warnings warnings;
};

/// theta_opt = sigma_x sigma_q T1 sqrt(sum 1/t_i) / ((1 - lambda) sqrt(T3)),
/// lambda_opt = 1 - sigma_x sigma_q T1 sqrt(sum 1/t_i) / (theta sqrt(T3)).
inline OptimalParameters optimal_parameters(const TheoryInputs& in)
{
    validate(in);
    if (!(in.sigma_q2 > 0.0)) {
        throw invalid_regime("optimal parameters need a random-walk variance sigma_q2 > 0");
    }
    const TaylorTerms tt = taylor_terms(in.moments, in.sigma);
    if (!(tt.t3 > 0.0)) {
        throw invalid_regime("optimal parameters need T3 > 0");
    }
    const Eigen::VectorXd t = sparsity_profile(in.w_true, in.alpha);
    const double root = std::sqrt(in.sigma_x2) * std::sqrt(in.sigma_q2) * tt.t1 *
                        std::sqrt(t.cwiseInverse().sum()) / std::sqrt(tt.t3);
    OptimalParameters out;
    out.warnings = tt.warnings;
    out.theta_opt = root / (1.0 - in.lambda);
    out.lambda_opt = 1.0 - root / in.theta;
    out.lambda_opt_in_range = out.lambda_opt > 0.0 && out.lambda_opt < 1.0;
    if (!out.lambda_opt_in_range) {
        std::ostringstream os;
        os << "lambda_opt = " << out.lambda_opt << " lies outside (0, 1)";
        out.warnings.push_back(os.str());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Convex combination of two PRMCC filters

struct CrossMsd {
    double theta12 = 0.0;
    double value = 0.0;
    Warnings warnings;
};

/// Steady-state tr(E[h1 h2^T]) of two PRMCC filters with trace controllers
/// theta1 and theta2 sharing the other hyperparameters, with theta12 = theta1 theta2 / (theta1 + theta2):
///   sum_i [(1-lambda) theta12 t_i T5 / (sigma_x^2 T1) (+ sigma_q^2 T1 / ((1-lambda) (theta1 + theta2) t_i))]
///         / [T2 - (1-lambda) theta12 t_i T6 / T1].
/// With theta1 = theta2 this is exactly the component MSD, tracking term included.
inline CrossMsd msd_cross(const TheoryInputs& in, double theta1, double theta2)
{
    validate(in);
    if (!(theta1 > 0.0 && theta2 > 0.0)) {
        throw std::invalid_argument("trace controllers must be positive");
    }
    const TaylorTerms tt = taylor_terms(in.moments, in.sigma);
    const Eigen::VectorXd t = sparsity_profile(in.w_true, in.alpha);
    const double l = 1.0 - in.lambda;
    if (in.sigma_q2 > 0.0 && !(l > 0.0)) {
        throw invalid_regime("tracking MSD needs lambda < 1");
    }
    CrossMsd out;
    out.theta12 = theta_12(theta1, theta2);
    out.warnings = tt.warnings;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        double num = l * out.theta12 * t[i] * tt.t5 / (in.sigma_x2 * tt.t1);
        if (in.sigma_q2 > 0.0) {
            num += in.sigma_q2 * tt.t1 / (l * (theta1 + theta2) * t[i]);
        }
        const double den = tt.t2 - l * out.theta12 * t[i] * tt.t6 / tt.t1;
        if (!(den > 0.0)) {
            throw invalid_regime("cross MSD denominator is not positive");
        }
        out.value += num / den;
    }
    return out;
}

/// Component MSD with trace controller theta_j (tracking-aware).
inline double msd_component(const TheoryInputs& in, double theta_j)
{
    TheoryInputs c = in;
    c.theta = theta_j;
    return msd_tracking(c).total;
}

struct CombinedMsd {
    int regime = 3;            ///< 1: filter 1 wins, 2: filter 2 wins, 3: interior mix
    double msd = 0.0;
    double msd1 = 0.0;
    double msd2 = 0.0;
    double msd12 = 0.0;
    double delta1 = 0.0;       ///< msd1 - msd12
    double delta2 = 0.0;       ///< msd2 - msd12
    double theta12 = 0.0;
    double rho_inf = 0.5;
    double b_inf = 0.0;
    bool rho_clamped = false;
    Warnings warnings;
};

/// Steady state of the mixing parameter and the combined MSD.
///
/// Case 1 (delta1 <= 0 <= delta2): b -> b+, MSD ~ MSD1.
/// Case 2 (delta2 <= 0 <= delta1): b -> -b+, MSD ~ MSD2.
/// Case 3 (both positive): rho = delta2 / (delta1 + delta2), clamped to
/// [1 - rho+, rho+]; MSD = MSD12 + delta1 delta2 / (delta1 + delta2) from the
/// unclamped rho. Differences within 1e-12 of the MSD scale count as zero; a
/// double tie is the limit of case 3 (rho = 1/2, MSD = MSD12).
inline CombinedMsd combined_msd(const TheoryInputs& in, double theta1, double theta2, double b_plus = 4.0)
{
    if (!(b_plus > 0.0)) {
        throw std::invalid_argument("b_plus must be positive");
    }
    CombinedMsd out;
    out.msd1 = msd_component(in, theta1);
    out.msd2 = msd_component(in, theta2);
    const CrossMsd cross = msd_cross(in, theta1, theta2);
    out.msd12 = cross.value;
    out.theta12 = cross.theta12;
    out.warnings = cross.warnings;
    out.delta1 = out.msd1 - out.msd12;
    out.delta2 = out.msd2 - out.msd12;

    const double tol = 1e-12 * std::max({std::abs(out.msd1), std::abs(out.msd2), std::abs(out.msd12)});
    const double d1 = std::abs(out.delta1) <= tol ? 0.0 : out.delta1;
    const double d2 = std::abs(out.delta2) <= tol ? 0.0 : out.delta2;
    const double rho_plus = 1.0 / (1.0 + std::exp(-b_plus));

    const auto interior = [&](double rho) {
        out.regime = 3;
        const double lo = 1.0 - rho_plus;
        out.rho_clamped = rho < lo || rho > rho_plus;
        out.rho_inf = std::clamp(rho, lo, rho_plus);
        out.b_inf = std::log(out.rho_inf / (1.0 - out.rho_inf));
    };
    const auto corner = [&](int which) {
        out.regime = which;
        out.b_inf = which == 1 ? b_plus : -b_plus;
        out.rho_inf = 1.0 / (1.0 + std::exp(-out.b_inf));
        out.msd = which == 1 ? out.msd1 : out.msd2;
    };

    if (d1 > 0.0 && d2 > 0.0) {
        interior(d2 / (d1 + d2));
        out.msd = out.msd12 + d1 * d2 / (d1 + d2);
    } else if (d1 == 0.0 && d2 == 0.0) {
        interior(0.5);
        out.msd = out.msd12;
    } else if (d1 <= 0.0 && d2 >= 0.0) {
        corner(1);
    } else if (d2 <= 0.0 && d1 >= 0.0) {
        corner(2);
    } else {
        out.warnings.push_back("cross MSD exceeds both component MSDs; outside the analysed regime");
        corner(out.msd1 <= out.msd2 ? 1 : 2);
    }
    return out;
}

inline double to_db(double linear) { return 10.0 * std::log10(std::max(linear, 1e-30)); }

}  // namespace prmcc::theory
