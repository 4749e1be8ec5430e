// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Fitting the per-axis regression constants from condition aggregates,
// accuracy metrics, leave-one-condition-out cross-validation, and the
// likelihood-ratio test of normal against skew-normal tap distributions.
//
// Fit order follows the model structure: the skewness hinge first, whose
// zero crossing -c/d splits conditions into the edge-affected region and
// the far region for the variance and mean regressions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "edgetap/error.hpp"
#include "edgetap/optimize.hpp"
#include "edgetap/predictor.hpp"
#include "edgetap/skewnormal.hpp"
#include "edgetap/special_fn.hpp"
#include "edgetap/stats.hpp"
#include "edgetap/taplog.hpp"

namespace edgetap {

enum class Axis { X, Y };

inline std::string_view to_string(Axis a) { return a == Axis::X ? "x" : "y"; }

struct FitOptions {
    VarianceTarget target = VarianceTarget::SigmaSquared;
    /// Weight each condition by its trial count instead of equally.
    bool weight_by_trials = false;
};

struct Metrics {
    double r2 = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    double mape = 0.0;  ///< percent, over nonzero observations
    std::size_t n = 0;
    std::size_t mape_skipped = 0;  ///< observations equal to zero
};

inline Metrics compute_metrics(std::span<const double> predicted, std::span<const double> observed) {
    if (predicted.size() != observed.size()) {
        throw ParameterError("compute_metrics: " + std::to_string(predicted.size()) + " predictions for " +
                             std::to_string(observed.size()) + " observations");
    }
    if (observed.empty()) throw ParameterError("compute_metrics: empty input");
    Metrics m;
    m.n = observed.size();
    const double n = static_cast<double>(m.n);
    double mean = 0.0;
    for (double o : observed) mean += o;
    mean /= n;
    double sse = 0.0, sst = 0.0, abs_sum = 0.0, pct_sum = 0.0;
    std::size_t pct_n = 0;
    for (std::size_t i = 0; i < m.n; ++i) {
        const double e = predicted[i] - observed[i];
        sse += e * e;
        sst += (observed[i] - mean) * (observed[i] - mean);
        abs_sum += std::abs(e);
        if (observed[i] != 0.0) {
            pct_sum += std::abs(e / observed[i]);
            ++pct_n;
        } else {
            ++m.mape_skipped;
        }
    }
    if (sst > 0.0) {
        m.r2 = 1.0 - sse / sst;
    } else {
        m.r2 = sse == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
    }
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sse / n);
    m.mape = pct_n ? 100.0 * pct_sum / static_cast<double>(pct_n) : std::numeric_limits<double>::quiet_NaN();
    return m;
}

/// One condition seen along a single axis.
struct AxisObservation {
    AxisGeometry geometry;
    SampleMoments moments;
    double observed_sr = 0.0;
    double weight = 1.0;

    /// Skewness and mean with the edge side folded onto the negative side.
    double folded_skewness() const { return detail::edge_sign(geometry.edge) * moments.skewness; }
    double folded_mean() const { return detail::edge_sign(geometry.edge) * moments.mean; }
};

inline std::vector<AxisObservation> observations(std::span<const ConditionAggregate> aggs, Axis axis,
                                                 const FitOptions& opt = {}) {
    std::vector<AxisObservation> out;
    for (const auto& a : aggs) {
        AxisObservation o;
        o.geometry = axis == Axis::X ? a.layout.x : a.layout.y;
        o.moments = axis == Axis::X ? a.moments_x : a.moments_y;
        o.observed_sr = axis == Axis::X ? a.observed_sr_x : a.observed_sr_y;
        o.weight = opt.weight_by_trials ? static_cast<double>(a.n) : 1.0;
        if (!std::isfinite(o.moments.mean) || !std::isfinite(o.moments.variance) ||
            !std::isfinite(o.moments.skewness) || !(o.moments.variance > 0.0)) {
            continue;
        }
        out.push_back(o);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Skewness hinge

struct HingeFit {
    double c = 0.0;
    double d = 0.0;
    double sse = 0.0;
    double threshold() const { return d < 0.0 ? -c / d : 0.0; }
};

namespace detail {

struct Point {
    double x, y, w;
};

inline double hinge_sse(std::span<const Point> pts, double c, double d) {
    double s = 0.0;
    for (const auto& p : pts) {
        const double r = p.y - std::max(0.0, c + d * p.x);
        s += p.w * r * r;
    }
    return s;
}

inline std::optional<std::pair<double, double>> weighted_line(std::span<const Point> pts) {
    std::set<double> xs;
    for (const auto& p : pts) xs.insert(p.x);
    if (xs.size() < 2) return std::nullopt;
    Eigen::MatrixXd a(pts.size(), 2);
    Eigen::VectorXd y(pts.size()), w(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = pts[i].x;
        y[i] = pts[i].y;
        w[i] = pts[i].w;
    }
    try {
        const auto beta = least_squares(a, y, "skewness line", &w);
        return std::pair{beta[0], beta[1]};
    } catch (const FitError&) {
        return std::nullopt;
    }
}

}  // namespace detail

/// Least squares for |gamma1| = max(0, c + d d_edge) with c >= 0, d <= 0.
///
/// Because d <= 0 the active set is always a prefix of the conditions sorted
/// by d_edge, so every prefix line fit is a candidate; the best one is then
/// polished by Nelder-Mead on the hinge loss. Ties keep c = d = 0.
inline HingeFit fit_gamma1(std::span<const ConditionAggregate> aggs, Axis axis, const FitOptions& opt = {}) {
    std::vector<detail::Point> pts;
    for (const auto& o : observations(aggs, axis, opt)) {
        if (o.geometry.edge == EdgeSide::None) continue;
        pts.push_back({o.geometry.d_edge(), o.folded_skewness(), o.weight});
    }
    std::set<double> distinct;
    for (const auto& p : pts) distinct.insert(p.x);
    if (distinct.size() < 3) {
        throw FitError("skewness fit (" + std::string(to_string(axis)) + "): need at least 3 distinct d_edge values, got " +
                       std::to_string(distinct.size()));
    }
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.x < b.x; });

    HingeFit best{0.0, 0.0, detail::hinge_sse(pts, 0.0, 0.0)};
    auto consider = [&](double c, double d) {
        if (!std::isfinite(c) || !std::isfinite(d)) return;
        c = std::max(0.0, c);
        d = std::min(0.0, d);
        if (d == 0.0 && c > 0.0) return;
        const double s = detail::hinge_sse(pts, c, d);
        if (s < best.sse - 1e-15 * (1.0 + best.sse)) best = {c, d, s};
    };

    // Lines over every prefix of the sorted d_edge values.
    for (auto it = std::next(distinct.begin()); it != distinct.end(); ++it) {
        const double cut = *it;
        std::vector<detail::Point> prefix;
        for (const auto& p : pts) {
            if (p.x <= cut) prefix.push_back(p);
        }
        if (auto line = detail::weighted_line(prefix)) consider(line->first, line->second);
    }
    // Line through the visibly skewed conditions.
    {
        std::vector<detail::Point> skewed;
        for (const auto& p : pts) {
            if (std::abs(p.y) > 0.05) skewed.push_back(p);
        }
        if (auto line = detail::weighted_line(skewed)) consider(line->first, line->second);
    }

    if (best.d < 0.0) {
        auto loss = [&](const std::vector<double>& v) {
            return detail::hinge_sse(pts, std::max(0.0, v[0]), std::min(0.0, v[1]));
        };
        const auto nm = nelder_mead(loss, {best.c, best.d},
                                    {0.05 * std::max(best.c, 0.1), 0.05 * std::max(-best.d, 0.01)},
                                    {4000, 1e-16});
        consider(nm.x[0], nm.x[1]);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Variance and mean

struct VarianceFit {
    double e = 0.0, f = 0.0, g = 0.0;  ///< edge-affected region
    double h = 0.0, i = 0.0;           ///< far region
    std::size_t skew_points = 0;
    std::size_t far_points = 0;
};

namespace detail {

inline double variance_target_value(const AxisObservation& o, VarianceTarget target) {
    return target == VarianceTarget::Sigma ? std::sqrt(o.moments.variance) : o.moments.variance;
}

inline bool below_threshold(const AxisObservation& o, double threshold) {
    return o.geometry.edge != EdgeSide::None && o.geometry.d_edge() < threshold;
}

inline std::string region_label(Axis axis, bool skew, double threshold) {
    return std::string("variance fit (") + std::string(to_string(axis)) + "), " +
           (skew ? "edge region d_edge < " : "far region d_edge >= ") + std::to_string(threshold) + " mm";
}

}  // namespace detail

/// Two independent least-squares fits split at d_edge = threshold:
/// edge region on [1, S^2, margin], far region on [1, S^2].
inline VarianceFit fit_variance(std::span<const ConditionAggregate> aggs, Axis axis, double threshold,
                                VarianceTarget target, const FitOptions& opt = {}) {
    std::vector<AxisObservation> skew, far;
    for (const auto& o : observations(aggs, axis, opt)) {
        (detail::below_threshold(o, threshold) ? skew : far).push_back(o);
    }
    VarianceFit out;
    out.skew_points = skew.size();
    out.far_points = far.size();
    auto solve = [&](const std::vector<AxisObservation>& rows, bool is_skew) {
        const Eigen::Index cols = is_skew ? 3 : 2;
        const auto label = detail::region_label(axis, is_skew, threshold);
        if (static_cast<Eigen::Index>(rows.size()) < cols) {
            throw FitError(label + ": " + std::to_string(rows.size()) + " condition(s) for " +
                           std::to_string(cols) + " parameters");
        }
        Eigen::MatrixXd a(rows.size(), cols);
        Eigen::VectorXd y(rows.size()), w(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& geo = rows[r].geometry;
            a(r, 0) = 1.0;
            a(r, 1) = geo.size * geo.size;
            if (is_skew) a(r, 2) = geo.margin;
            y[r] = detail::variance_target_value(rows[r], target);
            w[r] = rows[r].weight;
        }
        return least_squares(a, y, label, &w);
    };
    const auto bs = solve(skew, true);
    const auto bf = solve(far, false);
    out.e = bs[0];
    out.f = bs[1];
    out.g = bs[2];
    out.h = bf[0];
    out.i = bf[1];
    return out;
}

struct MeanFit {
    double j = 0.0, k = 0.0, l = 0.0;
    /// Quadratic coefficient vanished; l is meaningless and reported as 0.
    bool degenerate = false;
    std::size_t points = 0;
};

/// Edge-region mean as j + k (d_edge - l)^2 via least squares on the
/// expanded polynomial b0 + b1 x + b2 x^2.
inline MeanFit fit_mean(std::span<const ConditionAggregate> aggs, Axis axis, double threshold,
                        const FitOptions& opt = {}) {
    std::vector<AxisObservation> rows;
    for (const auto& o : observations(aggs, axis, opt)) {
        if (detail::below_threshold(o, threshold)) rows.push_back(o);
    }
    std::set<double> distinct;
    for (const auto& r : rows) distinct.insert(r.geometry.d_edge());
    const std::string label = std::string("mean fit (") + std::string(to_string(axis)) + "), edge region";
    if (distinct.size() < 3) {
        throw FitError(label + ": need at least 3 distinct d_edge values, got " + std::to_string(distinct.size()));
    }
    Eigen::MatrixXd a(rows.size(), 3);
    Eigen::VectorXd y(rows.size()), w(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double x = rows[r].geometry.d_edge();
        a(r, 0) = 1.0;
        a(r, 1) = x;
        a(r, 2) = x * x;
        y[r] = rows[r].folded_mean();
        w[r] = rows[r].weight;
    }
    const auto beta = least_squares(a, y, label, &w);
    MeanFit out;
    out.points = rows.size();
    if (std::abs(beta[2]) < 1e-12) {
        out.j = beta[0];
        out.degenerate = true;
        return out;
    }
    out.k = beta[2];
    out.l = -beta[1] / (2.0 * beta[2]);
    out.j = beta[0] - out.k * out.l * out.l;
    return out;
}

// ---------------------------------------------------------------------------
// Full fit

struct ResidualRow {
    AxisGeometry geometry;
    bool skew_region = false;
    double observed_gamma1 = 0.0, predicted_gamma1 = 0.0;
    double observed_sigma2 = 0.0, predicted_sigma2 = 0.0;
    double observed_mu = 0.0, predicted_mu = 0.0;
    double observed_sr = 0.0, predicted_sr = 0.0;
};

struct FitReport {
    Axis axis = Axis::X;
    AxisConstants constants;
    std::optional<BaselineConstants> baseline;  ///< absent when the sizes cannot identify it
    double threshold = 0.0;
    bool mean_degenerate = false;
    Metrics gamma1;    ///< edge conditions
    Metrics sigma;     ///< all conditions, on sigma
    Metrics variance;  ///< all conditions, on sigma^2
    Metrics mu;        ///< edge-region conditions
    Metrics sr;        ///< all conditions
    std::optional<Metrics> baseline_sr;
    std::vector<ResidualRow> residuals;
};

namespace detail {

inline BaselineConstants fit_baseline(std::span<const AxisObservation> obs, Axis axis) {
    Eigen::MatrixXd a(obs.size(), 2);
    Eigen::VectorXd y(obs.size()), w(obs.size());
    for (std::size_t r = 0; r < obs.size(); ++r) {
        a(r, 0) = obs[r].geometry.size * obs[r].geometry.size;
        a(r, 1) = 1.0;
        y[r] = obs[r].moments.variance;
        w[r] = obs[r].weight;
    }
    const auto beta = least_squares(a, y, "baseline variance fit (" + std::string(to_string(axis)) + ")", &w);
    return {beta[0], beta[1]};
}

}  // namespace detail

inline FitReport fit_all(std::span<const ConditionAggregate> aggs, Axis axis, const FitOptions& opt = {}) {
    const auto obs = observations(aggs, axis, opt);
    if (obs.empty()) throw FitError("no usable conditions for axis " + std::string(to_string(axis)));

    FitReport rep;
    rep.axis = axis;
    const auto hinge = fit_gamma1(aggs, axis, opt);
    rep.threshold = hinge.threshold();
    const auto var = fit_variance(aggs, axis, rep.threshold, opt.target, opt);
    const auto mean = fit_mean(aggs, axis, rep.threshold, opt);

    auto& k = rep.constants;
    k.c = hinge.c;
    k.d = hinge.d;
    k.e = var.e;
    k.f = var.f;
    k.g = var.g;
    k.h = var.h;
    k.i = var.i;
    k.j = mean.j;
    k.k = mean.k;
    k.l = mean.l;
    k.variance_target = opt.target;
    k.mean_fitted_edge = EdgeSide::Negative;
    k.validate();
    rep.mean_degenerate = mean.degenerate;

    try {
        rep.baseline = detail::fit_baseline(obs, axis);
    } catch (const FitError&) {
        rep.baseline.reset();
    }

    std::vector<double> g_obs, g_pred, s_obs, s_pred, v_obs, v_pred, m_obs, m_pred, sr_obs, sr_pred, b_pred;
    bool baseline_ok = rep.baseline.has_value();
    for (const auto& o : obs) {
        AxisPrediction p;
        try {
            p = predict_axis(o.geometry, k);
        } catch (const ModelDomainError& e) {
            throw FitError(std::string("fitted constants are invalid for a fitted condition: ") + e.what());
        }
        ResidualRow row;
        row.geometry = o.geometry;
        row.skew_region = p.skew_region;
        row.observed_gamma1 = o.moments.skewness;
        row.predicted_gamma1 = p.moments.gamma1;
        row.observed_sigma2 = o.moments.variance;
        row.predicted_sigma2 = p.moments.sigma2;
        row.observed_mu = o.moments.mean;
        row.predicted_mu = p.moments.mu;
        row.observed_sr = o.observed_sr;
        row.predicted_sr = p.sr;
        rep.residuals.push_back(row);

        if (o.geometry.edge != EdgeSide::None) {
            g_obs.push_back(row.observed_gamma1);
            g_pred.push_back(row.predicted_gamma1);
        }
        if (p.skew_region) {
            m_obs.push_back(row.observed_mu);
            m_pred.push_back(row.predicted_mu);
        }
        s_obs.push_back(std::sqrt(row.observed_sigma2));
        s_pred.push_back(std::sqrt(row.predicted_sigma2));
        v_obs.push_back(row.observed_sigma2);
        v_pred.push_back(row.predicted_sigma2);
        sr_obs.push_back(row.observed_sr);
        sr_pred.push_back(row.predicted_sr);
        if (baseline_ok) {
            try {
                const double bv = baseline_variance(o.geometry.size, rep.baseline->a, rep.baseline->b);
                b_pred.push_back(baseline_sr_1d(o.geometry.size, std::sqrt(bv)));
            } catch (const ModelDomainError&) {
                baseline_ok = false;
            }
        }
    }
    if (!g_obs.empty()) rep.gamma1 = compute_metrics(g_pred, g_obs);
    if (!m_obs.empty()) rep.mu = compute_metrics(m_pred, m_obs);
    rep.sigma = compute_metrics(s_pred, s_obs);
    rep.variance = compute_metrics(v_pred, v_obs);
    rep.sr = compute_metrics(sr_pred, sr_obs);
    if (baseline_ok) rep.baseline_sr = compute_metrics(b_pred, sr_obs);
    return rep;
}

// ---------------------------------------------------------------------------
// Cross-validation

struct LoocvFold {
    AxisGeometry geometry;
    double predicted = 0.0;
    double observed = 0.0;
};

struct LoocvResult {
    Metrics metrics;
    std::vector<LoocvFold> folds;
    std::vector<std::pair<AxisGeometry, std::string>> skipped;
};

/// Leave one condition out, refit on the rest, predict the held-out SR.
inline LoocvResult loocv(std::span<const ConditionAggregate> aggs, Axis axis, const FitOptions& opt = {}) {
    std::vector<ConditionAggregate> sorted(aggs.begin(), aggs.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.layout < b.layout; });
    if (sorted.size() < 3) throw FitError("cross-validation needs at least 3 conditions");

    LoocvResult out;
    std::vector<double> pred, obs;
    for (std::size_t held = 0; held < sorted.size(); ++held) {
        std::vector<ConditionAggregate> train;
        train.reserve(sorted.size() - 1);
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (i != held) train.push_back(sorted[i]);
        }
        const auto& h = sorted[held];
        const auto geo = axis == Axis::X ? h.layout.x : h.layout.y;
        try {
            const auto rep = fit_all(train, axis, opt);
            LoocvFold fold{geo, predict_axis_sr(geo, rep.constants),
                           axis == Axis::X ? h.observed_sr_x : h.observed_sr_y};
            pred.push_back(fold.predicted);
            obs.push_back(fold.observed);
            out.folds.push_back(fold);
        } catch (const std::exception& e) {
            out.skipped.emplace_back(geo, e.what());
        }
    }
    if (out.folds.empty()) throw FitError("every cross-validation fold failed");
    out.metrics = compute_metrics(pred, obs);
    return out;
}

// ---------------------------------------------------------------------------
// Likelihood

inline constexpr double kMaxShape = 50.0;

struct MleResult {
    SkewNormalParams params;
    double llf = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

namespace detail {

inline double skewnormal_nll(std::span<const double> z, double xi, double log_omega, double alpha) {
    log_omega = std::clamp(log_omega, -30.0, 30.0);
    const double a = std::clamp(alpha, -kMaxShape, kMaxShape);
    const double omega = std::exp(log_omega);
    const double c = std::log(2.0) - log_omega - 0.5 * std::log(2.0 * std::numbers::pi);
    double ll = 0.0;
    for (double v : z) {
        const double u = (v - xi) / omega;
        ll += c - 0.5 * u * u + log_std_normal_cdf(a * u);
    }
    const double excess = std::max(0.0, std::abs(alpha) - kMaxShape);
    return -ll + 1e3 * excess * excess;
}

struct Standardized {
    std::vector<double> z;
    double mean = 0.0;
    double sd = 1.0;  ///< n denominator
};

inline Standardized standardize(std::span<const double> samples) {
    if (samples.size() < 8) {
        throw FitError("likelihood fit needs at least 8 samples, got " + std::to_string(samples.size()));
    }
    for (double v : samples) {
        if (!std::isfinite(v)) throw FitError("likelihood fit: non-finite sample");
    }
    const auto m = sample_moments(samples);
    const double n = static_cast<double>(samples.size());
    const double var_n = m.variance * (n - 1.0) / n;
    if (!(var_n > 0.0)) throw FitError("likelihood fit: samples have zero variance");
    Standardized s;
    s.mean = m.mean;
    s.sd = std::sqrt(var_n);
    s.z.reserve(samples.size());
    for (double v : samples) s.z.push_back((v - s.mean) / s.sd);
    return s;
}

inline MleResult mle_standardized(std::span<const double> z) {
    auto nll = [&](const std::vector<double>& v) { return skewnormal_nll(z, v[0], v[1], v[2]); };
    const auto mom = sample_moments(z);
    const double n = static_cast<double>(z.size());
    const auto start = moments_to_skewnormal({0.0, mom.variance * (n - 1.0) / n, mom.skewness});

    const std::vector<std::vector<double>> starts = {
        {start.xi, std::log(start.omega), std::clamp(start.alpha, -kMaxShape, kMaxShape)},
        {0.0, 0.0, 0.0}};
    MleResult best;
    best.llf = -std::numeric_limits<double>::infinity();
    for (const auto& x0 : starts) {
        auto r = nelder_mead(nll, x0, {0.1, 0.1, 0.5});
        // One restart from the best vertex resets a collapsed simplex.
        auto r2 = nelder_mead(nll, r.x, {0.05, 0.05, 0.25});
        r2.iterations += r.iterations;
        if (-r2.fx > best.llf) {
            best.llf = -r2.fx;
            best.params = {r2.x[0], std::exp(std::clamp(r2.x[1], -30.0, 30.0)),
                           std::clamp(r2.x[2], -kMaxShape, kMaxShape)};
            best.converged = r2.converged;
            best.iterations = r2.iterations;
        }
    }
    return best;
}

}  // namespace detail

/// Skew-normal maximum likelihood by Nelder-Mead over (xi, log omega, alpha)
/// on standardized samples, |alpha| <= 50. Started from the method-of-moments
/// point and from the normal fit; the better optimum is returned.
inline MleResult mle_skewnormal(std::span<const double> samples) {
    const auto s = detail::standardize(samples);
    auto r = detail::mle_standardized(s.z);
    const double n = static_cast<double>(samples.size());
    r.params.xi = s.mean + s.sd * r.params.xi;
    r.params.omega *= s.sd;
    r.llf -= n * std::log(s.sd);
    return r;
}

/// Upper tail of the chi-square distribution with one degree of freedom.
inline double chi2_1_sf(double x) {
    if (!(x > 0.0)) return 1.0;
    return erfc(std::sqrt(0.5 * x));
}

struct LRTestResult {
    double llf_normal = 0.0;
    double llf_skewnormal = 0.0;
    double statistic = 0.0;
    double p_value = 1.0;
    SkewNormalParams params;
    bool converged = false;
    std::size_t n = 0;
};

inline LRTestResult lr_test(std::span<const double> samples) {
    const auto s = detail::standardize(samples);
    const auto mle = detail::mle_standardized(s.z);
    const double n = static_cast<double>(samples.size());
    const double llf_normal_std = -0.5 * n * (std::log(2.0 * std::numbers::pi) + 1.0);
    LRTestResult out;
    out.n = samples.size();
    out.statistic = 2.0 * (mle.llf - llf_normal_std);
    out.p_value = chi2_1_sf(out.statistic);
    out.llf_normal = llf_normal_std - n * std::log(s.sd);
    out.llf_skewnormal = mle.llf - n * std::log(s.sd);
    out.params = {s.mean + s.sd * mle.params.xi, s.sd * mle.params.omega, mle.params.alpha};
    out.converged = mle.converged;
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json metrics_to_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["r2"] = m.r2;
    j["mae"] = m.mae;
    j["rmse"] = m.rmse;
    j["mape"] = std::isfinite(m.mape) ? nlohmann::ordered_json(m.mape) : nlohmann::ordered_json(nullptr);
    j["n"] = m.n;
    if (m.mape_skipped) j["mape_skipped"] = m.mape_skipped;
    return j;
}

inline nlohmann::ordered_json fit_report_metrics_json(const FitReport& r) {
    nlohmann::ordered_json j;
    j["threshold_mm"] = r.threshold;
    j["mean_degenerate"] = r.mean_degenerate;
    j["gamma1"] = metrics_to_json(r.gamma1);
    j["sigma"] = metrics_to_json(r.sigma);
    j["variance"] = metrics_to_json(r.variance);
    j["mu"] = metrics_to_json(r.mu);
    j["sr"] = metrics_to_json(r.sr);
    if (r.baseline_sr) j["baseline_sr"] = metrics_to_json(*r.baseline_sr);
    return j;
}

inline void write_residuals_csv(std::ostream& out, const FitReport& r, bool header = true) {
    using detail::format_number;
    if (header)
        out << "axis,size_mm,margin_mm,edge,d_edge_mm,skew_region,observed_gamma1,predicted_gamma1,"
           "observed_sigma2,predicted_sigma2,observed_mu,predicted_mu,observed_sr,predicted_sr\n";
    for (const auto& row : r.residuals) {
        out << to_string(r.axis) << ',' << format_number(row.geometry.size) << ','
            << format_number(row.geometry.margin) << ',' << to_string(row.geometry.edge) << ','
            << format_number(row.geometry.d_edge()) << ',' << (row.skew_region ? 1 : 0) << ','
            << format_number(row.observed_gamma1) << ',' << format_number(row.predicted_gamma1) << ','
            << format_number(row.observed_sigma2) << ',' << format_number(row.predicted_sigma2) << ','
            << format_number(row.observed_mu) << ',' << format_number(row.predicted_mu) << ','
            << format_number(row.observed_sr) << ',' << format_number(row.predicted_sr) << '\n';
    }
}

}  // namespace edgetap
