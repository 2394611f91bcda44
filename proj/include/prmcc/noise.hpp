#pragma once

#include "prmcc/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

namespace prmcc {

/// Zero-mean Gaussian with the given variance.
struct GaussianNoise {
    double variance = 1.0;
};

/// p1 N(0, variance1) + p2 N(0, variance2), p1 + p2 = 1. The usual impulsive
/// model has a tiny first variance and a rare, large second one.
struct MixedGaussianNoise {
    double p1 = 0.9;
    double variance1 = 1e-4;
    double p2 = 0.1;
    double variance2 = 100.0;
};

/// Uniform on [-half_width, half_width].
struct UniformNoise {
    double half_width = 0.5;
};

using NoiseModel = std::variant<GaussianNoise, MixedGaussianNoise, UniformNoise>;

/// Central moments E[v^2], E[v^4], E[v^6].
struct MomentSet {
    double m2 = 0.0;
    double m4 = 0.0;
    double m6 = 0.0;

    /// m2 > 0, m4 >= m2^2, m6 >= 0.
    bool consistent() const noexcept { return m2 > 0.0 && m4 >= m2 * m2 * (1.0 - 1e-12) && m6 >= 0.0; }
};

inline void validate(const NoiseModel& model)
{
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) {
                if (!(m.variance >= 0.0) || !std::isfinite(m.variance)) {
                    throw std::invalid_argument("variance must be non-negative and finite");
                }
            } else if constexpr (std::is_same_v<T, MixedGaussianNoise>) {
                if (!(m.p1 >= 0.0 && m.p2 >= 0.0) || std::abs(m.p1 + m.p2 - 1.0) > 1e-12) {
                    throw std::invalid_argument("mixture probabilities must be non-negative and sum to 1");
                }
                if (!(m.variance1 >= 0.0 && m.variance2 >= 0.0) || !std::isfinite(m.variance1) ||
                    !std::isfinite(m.variance2)) {
                    throw std::invalid_argument("mixture variances must be non-negative and finite");
                }
            } else {
                if (!(m.half_width >= 0.0) || !std::isfinite(m.half_width)) {
                    throw std::invalid_argument("half_width must be non-negative and finite");
                }
            }
        },
        model);
}

namespace detail {

inline MomentSet gaussian_moments(double var) noexcept
{
    return {var, 3.0 * var * var, 15.0 * var * var * var};
}

}  // namespace detail

/// Exact central moments of the model.
inline MomentSet moments(const NoiseModel& model)
{
    return std::visit(
        [](const auto& m) -> MomentSet {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) {
                return detail::gaussian_moments(m.variance);
            } else if constexpr (std::is_same_v<T, MixedGaussianNoise>) {
                const MomentSet a = detail::gaussian_moments(m.variance1);
                const MomentSet b = detail::gaussian_moments(m.variance2);
                return {m.p1 * a.m2 + m.p2 * b.m2, m.p1 * a.m4 + m.p2 * b.m4, m.p1 * a.m6 + m.p2 * b.m6};
            } else {
                const double a2 = m.half_width * m.half_width;
                return {a2 / 3.0, a2 * a2 / 5.0, a2 * a2 * a2 / 7.0};
            }
        },
        model);
}

/// Draws from a NoiseModel. Each sampler owns its distributions so that the
/// sequence depends only on the stream it is fed.
class NoiseSampler {
public:
    explicit NoiseSampler(NoiseModel model) : model_(std::move(model)) { validate(model_); }

    double operator()(RandomStream& rng)
    {
        return std::visit(
            [&](const auto& m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, GaussianNoise>) {
                    return std::sqrt(m.variance) * normal_(rng);
                } else if constexpr (std::is_same_v<T, MixedGaussianNoise>) {
                    const bool second = unit_(rng) < m.p2;
                    const double z = normal_(rng);
                    return std::sqrt(second ? m.variance2 : m.variance1) * z;
                } else {
                    return m.half_width * (2.0 * unit_(rng) - 1.0);
                }
            },
            model_);
    }

    const NoiseModel& model() const noexcept { return model_; }

private:
    NoiseModel model_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

/// One draw from `model` using a throwaway sampler.
inline double sample(const NoiseModel& model, RandomStream& rng) { return NoiseSampler(model)(rng); }

/// i.i.d. N(0, variance) input samples. Variance 0 yields zeros.
class WhiteGaussianSource {
public:
    explicit WhiteGaussianSource(double variance) : scale_(std::sqrt(variance))
    {
        if (!(variance >= 0.0) || !std::isfinite(variance)) {
            throw std::invalid_argument("input variance must be non-negative and finite");
        }
    }

    double operator()(RandomStream& rng) { return scale_ * normal_(rng); }

private:
    double scale_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline std::string noise_kind(const NoiseModel& model)
{
    switch (model.index()) {
    case 0:
        return "gaussian";
    case 1:
        return "mixed_gaussian";
    default:
        return "uniform";
    }
}

}  // namespace prmcc
