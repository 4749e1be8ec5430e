// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Error function, standard normal PDF/CDF and Owen's T function.
//
// erf uses the all-positive Maclaurin series erf(x) = 2/sqrt(pi) e^{-x^2}
// sum_n (2x^2)^n x / (2n+1)!! for |x| < 2.5 and the Laplace continued
// fraction for erfc above that; absolute error stays below 1e-15 on the
// real line. Owen's T reduces |a| > 1 to |a| < 1 and integrates the
// defining integrand with composite 20-point Gauss-Legendre panels sized
// to the Gaussian width 1/h.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "edgetap/error.hpp"

namespace edgetap {

namespace detail {

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw DomainError(std::string(what) + ": argument must be finite");
    }
}

struct GaussLegendre20 {
    std::array<double, 20> nodes{};
    std::array<double, 20> weights{};
};

// Nodes on [-1, 1] by Newton iteration on P_20.
inline const GaussLegendre20& gauss_legendre_20() {
    static const GaussLegendre20 rule = [] {
        constexpr int n = 20;
        GaussLegendre20 r;
        for (int i = 0; i < n / 2; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0;
                double p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            // Recompute the derivative at the converged node for the weight.
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            r.nodes[i] = -x;
            r.nodes[n - 1 - i] = x;
            r.weights[i] = w;
            r.weights[n - 1 - i] = w;
        }
        return r;
    }();
    return rule;
}

inline double erf_series(double x) {
    // x >= 0, x < 2.5
    const double x2 = x * x;
    double term = x;
    double sum = x;
    for (int n = 0; n < 200; ++n) {
        term *= 2.0 * x2 / (2.0 * n + 3.0);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x2) * sum;
}

// e^{x^2} erfc(x) for x >= 0.5.
inline double erfc_scaled_continued_fraction(double x) {
    // Modified Lentz on x + (1/2)/(x + 1/(x + (3/2)/(x + ...))).
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int k = 1; k < 1000; ++k) {
        const double a = 0.5 * k;
        d = x + a * d;
        if (d == 0.0) d = tiny;
        c = x + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / (std::sqrt(std::numbers::pi) * f);
}

inline double erfc_continued_fraction(double x) {
    return std::exp(-x * x) * erfc_scaled_continued_fraction(x);
}

constexpr double kErfSeriesLimit = 2.5;
// 1 - erf loses relative accuracy long before erf does; the fraction is
// good to a few ulps from here on.
constexpr double kErfcFractionStart = 0.5;

}  // namespace detail

inline double erfc(double x) {
    detail::require_finite(x, "erfc");
    if (x < 0.0) return 2.0 - erfc(-x);
    if (x < detail::kErfcFractionStart) return 1.0 - detail::erf_series(x);
    return detail::erfc_continued_fraction(x);
}

inline double erf(double x) {
    detail::require_finite(x, "erf");
    const double ax = std::abs(x);
    const double v = ax < detail::kErfSeriesLimit ? detail::erf_series(ax)
                                                  : 1.0 - detail::erfc_continued_fraction(ax);
    return x < 0.0 ? -v : v;
}

inline double std_normal_pdf(double z) {
    detail::require_finite(z, "std_normal_pdf");
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double std_normal_cdf(double z) {
    detail::require_finite(z, "std_normal_cdf");
    if (z < 0.0) return 0.5 * erfc(-z / std::numbers::sqrt2);
    return 0.5 * (1.0 + erf(z / std::numbers::sqrt2));
}

/// Upper tail 1 - Phi(z), accurate in relative terms for large z.
inline double std_normal_sf(double z) {
    detail::require_finite(z, "std_normal_sf");
    return 0.5 * erfc(z / std::numbers::sqrt2);
}

/// log Phi(z) without underflow in the lower tail.
inline double log_std_normal_cdf(double z) {
    detail::require_finite(z, "log_std_normal_cdf");
    if (z > -5.0) return std::log(std_normal_cdf(z));
    // Phi(z) = e^{-z^2/2} erfcx(-z/sqrt2) / 2
    const double x = -z / std::numbers::sqrt2;
    return std::log(0.5) - 0.5 * z * z + std::log(detail::erfc_scaled_continued_fraction(x));
}

namespace detail {

// Largest h for which exp(-h^2/2) is still a normal double.
constexpr double kOwenSaturation = 37.5;

// (1/2pi) int_0^a exp(-h^2 (1+t^2)/2) / (1+t^2) dt for h >= 0, 0 < a <= 1.
inline double owens_t_integral(double h, double a) {
    if (h == 0.0) return std::atan(a) / (2.0 * std::numbers::pi);
    if (h > kOwenSaturation) return 0.0;
    // Beyond t = 12/h the Gaussian factor is below e^-72.
    const double upper = std::min(a, 12.0 / h);
    const double width = std::min(0.25, 1.0 / h);
    const int panels = static_cast<int>(std::ceil(upper / width));
    const double step = upper / panels;
    const double h2 = h * h;
    const auto& gl = gauss_legendre_20();
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * step;
        double panel = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double t = mid + 0.5 * step * gl.nodes[i];
            const double t2 = t * t;
            panel += gl.weights[i] * std::exp(-0.5 * h2 * t2) / (1.0 + t2);
        }
        sum += 0.5 * step * panel;
    }
    return std::exp(-0.5 * h2) * sum / (2.0 * std::numbers::pi);
}

}  // namespace detail

/// Owen's T function T(h, a) = (1/2pi) int_0^a exp(-h^2(1+t^2)/2)/(1+t^2) dt.
inline double owens_t(double h, double a) {
    detail::require_finite(h, "owens_t");
    detail::require_finite(a, "owens_t");
    if (a == 0.0) return 0.0;
    const double sign = a < 0.0 ? -1.0 : 1.0;
    a = std::abs(a);
    h = std::abs(h);
    if (a <= 1.0) return sign * detail::owens_t_integral(h, a);

    // T(h,a) + T(ah,1/a) = Phi(h)/2 + Phi(ah)/2 - Phi(h)Phi(ah), h >= 0,
    // written in upper tails so nothing cancels for large h.
    const double ah = a * h;
    const double q_h = std_normal_sf(h);
    const double q_ah = std_normal_sf(ah);
    const double head = 0.5 * (q_ah * (1.0 - q_h) + q_h * (1.0 - q_ah));
    return sign * (head - detail::owens_t_integral(ah, 1.0 / a));
}

}  // namespace edgetap
