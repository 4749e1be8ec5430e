// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "edgetap/error.hpp"
#include "edgetap/special_fn.hpp"

namespace edgetap {

/// Location / scale / shape of a skew-normal distribution (mm, mm, 1).
struct SkewNormalParams {
    double xi = 0.0;
    double omega = 1.0;
    double alpha = 0.0;

    void validate() const {
        if (!std::isfinite(xi) || !std::isfinite(alpha)) {
            throw ParameterError("skew-normal location and shape must be finite");
        }
        if (!(omega > 0.0) || !std::isfinite(omega)) {
            throw ParameterError("skew-normal scale must be positive, got " + std::to_string(omega));
        }
    }

    /// delta = alpha / sqrt(1 + alpha^2)
    double delta() const { return alpha / std::sqrt(1.0 + alpha * alpha); }
};

/// Mean, variance and skewness of a tap-coordinate distribution.
struct MomentParams {
    double mu = 0.0;
    double sigma2 = 1.0;
    double gamma1 = 0.0;

    void validate() const {
        if (!std::isfinite(mu) || !std::isfinite(gamma1)) {
            throw ParameterError("moments must be finite");
        }
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
            throw ParameterError("variance must be positive, got " + std::to_string(sigma2));
        }
    }

    double sigma() const { return std::sqrt(sigma2); }
};

/// Upper bound on |delta| used by the moment conversion; alpha is infinite at |delta| = 1.
inline constexpr double kDeltaClamp = 0.999;

/// Skewness of a skew-normal with the given delta.
inline double skewness_from_delta(double delta) {
    const double m = delta * std::sqrt(2.0 / std::numbers::pi);
    return 0.5 * (4.0 - std::numbers::pi) * m * m * m / std::pow(1.0 - m * m, 1.5);
}

/// Largest |gamma1| representable under the delta clamp (about 0.9871).
inline double max_representable_skewness() { return skewness_from_delta(kDeltaClamp); }

/// Delta from skewness with the 0.999 clamp applied; never throws for finite input.
inline double delta_from_skewness(double gamma1) {
    if (gamma1 == 0.0) return 0.0;
    const double g23 = std::pow(std::abs(gamma1), 2.0 / 3.0);
    const double c23 = std::pow(0.5 * (4.0 - std::numbers::pi), 2.0 / 3.0);
    const double mag = std::sqrt(0.5 * std::numbers::pi * g23 / (g23 + c23));
    return std::copysign(std::min(kDeltaClamp, mag), gamma1);
}

inline SkewNormalParams moments_to_skewnormal(const MomentParams& m) {
    m.validate();
    const double delta = delta_from_skewness(m.gamma1);
    const double alpha = delta / std::sqrt(1.0 - delta * delta);
    const double omega = m.sigma() / std::sqrt(1.0 - 2.0 * delta * delta / std::numbers::pi);
    const double xi = m.mu - omega * delta * std::sqrt(2.0 / std::numbers::pi);
    return {xi, omega, alpha};
}

inline MomentParams skewnormal_to_moments(const SkewNormalParams& p) {
    p.validate();
    const double delta = p.delta();
    const double m = delta * std::sqrt(2.0 / std::numbers::pi);
    return {p.xi + p.omega * m, p.omega * p.omega * (1.0 - m * m), skewness_from_delta(delta)};
}

inline double skewnorm_pdf(double x, const SkewNormalParams& p) {
    p.validate();
    detail::require_finite(x, "skewnorm_pdf");
    const double z = (x - p.xi) / p.omega;
    return 2.0 / p.omega * std_normal_pdf(z) * std_normal_cdf(p.alpha * z);
}

inline double skewnorm_cdf(double x, const SkewNormalParams& p) {
    p.validate();
    detail::require_finite(x, "skewnorm_cdf");
    const double z = (x - p.xi) / p.omega;
    const double v = std_normal_cdf(z) - 2.0 * owens_t(z, p.alpha);
    return std::clamp(v, 0.0, 1.0);
}

/// P(lo <= X <= hi).
inline double skewnorm_interval(double lo, double hi, const SkewNormalParams& p) {
    return std::max(0.0, skewnorm_cdf(hi, p) - skewnorm_cdf(lo, p));
}

}  // namespace edgetap
