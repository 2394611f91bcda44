#pragma once

#include <cmath>
#include <limits>

namespace prmcc {

/// Kernel bandwidth sentinel. A filter configured with this bandwidth weighs
/// every error by exactly one, which turns RMCC/PRMCC into RLS/PRLS and
/// MCC/IPMCC into LMS/IPLMS.
inline constexpr double kInfiniteBandwidth = std::numeric_limits<double>::infinity();

inline bool is_infinite_bandwidth(double sigma) noexcept { return std::isinf(sigma) && sigma > 0; }

/// Gaussian kernel weight exp(-e^2 / (2 sigma^2)) without the normalising
/// constant. Underflows to zero for outliers, which is what rejects them.
inline double mcc_weight(double e, double sigma) noexcept
{
    if (is_infinite_bandwidth(sigma)) {
        return 1.0;
    }
    return std::exp(-(e * e) / (2.0 * sigma * sigma));
}

/// Correntropy-weighted error f(e) = exp(-e^2 / (2 sigma^2)) * e.
/// |f| peaks at sigma * exp(-1/2) for |e| = sigma.
inline double error_nonlinearity(double e, double sigma) noexcept
{
    if (is_infinite_bandwidth(sigma)) {
        return e;
    }
    return mcc_weight(e, sigma) * e;
}

/// Upper bound of |error_nonlinearity(e, sigma)| over all e.
inline double error_nonlinearity_bound(double sigma) noexcept
{
    if (is_infinite_bandwidth(sigma)) {
        return std::numeric_limits<double>::infinity();
    }
    return sigma * std::exp(-0.5);
}

}  // namespace prmcc
