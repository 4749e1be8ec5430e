// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace edgetap {

enum class SkewnessEstimator {
    Biased,   ///< b1 = m3 / m2^{3/2}
    Adjusted  ///< G1 = b1 sqrt(n(n-1)) / (n-2)
};

/// Sample mean, variance (n-1 denominator) and skewness.
/// variance is NaN for n < 2; skewness is 0 when all values coincide.
struct SampleMoments {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = std::numeric_limits<double>::quiet_NaN();
    double skewness = 0.0;
};

inline SampleMoments sample_moments(std::span<const double> xs,
                                    SkewnessEstimator est = SkewnessEstimator::Biased) {
    SampleMoments out;
    out.n = xs.size();
    if (xs.empty()) {
        out.mean = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / n;
    double m2 = 0.0;
    double m3 = 0.0;
    for (double x : xs) {
        const double dx = x - out.mean;
        m2 += dx * dx;
        m3 += dx * dx * dx;
    }
    if (xs.size() >= 2) out.variance = m2 / (n - 1.0);
    m2 /= n;
    m3 /= n;
    if (m2 > 0.0) {
        out.skewness = m3 / std::pow(m2, 1.5);
        if (est == SkewnessEstimator::Adjusted) {
            out.skewness = xs.size() > 2 ? out.skewness * std::sqrt(n * (n - 1.0)) / (n - 2.0)
                                         : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

/// Quantile by linear interpolation between order statistics,
/// position (n-1)p on a sorted sample.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    const double pos = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Ranks starting at 1, ties share their average rank.
inline std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: bad lengths");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

}  // namespace edgetap
