// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edgetap/error.hpp"

namespace edgetap {

struct NelderMeadOptions {
    std::size_t max_iterations = 2000;
    /// Converged once max_i |f(v_i) - f(v_best)| over the simplex drops below this.
    double f_tolerance = 1e-9;
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
/// The best vertex is never worse than x0.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const std::vector<double>& step,
                                    const NelderMeadOptions& opt = {}) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> v(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i) v[i + 1][i] += step[i];
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(v[i]);

    std::vector<std::size_t> order(n + 1);
    NelderMeadResult out;
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> v2(n + 1);
        std::vector<double> f2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            v2[i] = std::move(v[order[i]]);
            f2[i] = fv[order[i]];
        }
        v = std::move(v2);
        fv = std::move(f2);
    };
    auto point = [&](const std::vector<double>& centroid, double t) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + t * (v[n][i] - centroid[i]);
        return p;
    };

    sort_simplex();
    for (; out.iterations < opt.max_iterations; ++out.iterations) {
        if (std::isfinite(fv[n]) && fv[n] - fv[0] < opt.f_tolerance) {
            out.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < n; ++d) centroid[d] += v[i][d] / static_cast<double>(n);

        auto xr = point(centroid, -1.0);
        const double fr = f(xr);
        if (fr < fv[0]) {
            auto xe = point(centroid, -2.0);
            const double fe = f(xe);
            if (fe < fr) {
                v[n] = std::move(xe);
                fv[n] = fe;
            } else {
                v[n] = std::move(xr);
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            v[n] = std::move(xr);
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            auto xc = point(centroid, outside ? -0.5 : 0.5);
            const double fc = f(xc);
            if (fc < (outside ? fr : fv[n])) {
                v[n] = std::move(xc);
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t d = 0; d < n; ++d) v[i][d] = v[0][d] + 0.5 * (v[i][d] - v[0][d]);
                    fv[i] = f(v[i]);
                }
            }
        }
        sort_simplex();
    }
    out.x = v[0];
    out.fx = fv[0];
    return out;
}

/// Weighted least squares via column-pivoted QR. Throws FitError naming
/// `what` when the design does not have full column rank.
inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                     const std::string& what,
                                     const Eigen::VectorXd* weights = nullptr) {
    if (design.rows() < design.cols()) {
        throw FitError(what + ": " + std::to_string(design.rows()) + " point(s) for " +
                       std::to_string(design.cols()) + " parameters");
    }
    Eigen::MatrixXd a = design;
    Eigen::VectorXd b = y;
    if (weights) {
        const Eigen::VectorXd sw = weights->cwiseSqrt();
        a = sw.asDiagonal() * a;
        b = sw.asDiagonal() * b;
    }
    // Scale columns so the rank threshold is meaningful for mixed units.
    Eigen::VectorXd scale = a.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < scale.size(); ++c) {
        if (scale[c] == 0.0) throw FitError(what + ": design column " + std::to_string(c) + " is zero");
    }
    a = a * scale.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < a.cols()) {
        throw FitError(what + ": design is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                       std::to_string(a.cols()) + ")");
    }
    return qr.solve(b).cwiseQuotient(scale);
}

}  // namespace edgetap
