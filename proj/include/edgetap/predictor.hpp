// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Layout -> (skewness, variance, mean) per axis -> skew-normal parameters ->
// success rate, plus the Gaussian baseline whose variance is affine in the
// squared target size.
//
// Every axis is evaluated in an edge-relative frame where the nearest
// screen edge sits on the negative side; a PositiveSide axis is mirrored on
// the way out (skewness and mean change sign, success rate does not).

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include "edgetap/error.hpp"
#include "edgetap/skewnormal.hpp"
#include "edgetap/special_fn.hpp"

namespace edgetap {

enum class EdgeSide { Negative, Positive, None };

inline std::string_view to_string(EdgeSide s) {
    switch (s) {
        case EdgeSide::Negative: return "neg";
        case EdgeSide::Positive: return "pos";
        case EdgeSide::None: return "none";
    }
    return "none";
}

inline EdgeSide parse_edge_side(std::string_view s) {
    if (s == "neg") return EdgeSide::Negative;
    if (s == "pos") return EdgeSide::Positive;
    if (s == "none") return EdgeSide::None;
    throw ParameterError("edge side must be one of neg, pos, none; got '" + std::string(s) + "'");
}

/// One axis of a rectangular target: extent, gap to the nearest edge, and
/// which side that edge is on. Coordinates are relative to the target center.
struct AxisGeometry {
    double size = 1.0;
    double margin = 0.0;
    EdgeSide edge = EdgeSide::None;

    /// Distance from the edge to the target center.
    double d_edge() const { return margin + 0.5 * size; }

    void validate(std::string_view name = "axis") const {
        if (!(size > 0.0) || !std::isfinite(size)) {
            throw ParameterError(std::string(name) + " size must be positive");
        }
        if (!(margin >= 0.0) || !std::isfinite(margin)) {
            throw ParameterError(std::string(name) + " margin must be nonnegative");
        }
    }

    auto operator<=>(const AxisGeometry&) const = default;
};

struct TargetLayout {
    AxisGeometry x;
    AxisGeometry y;

    void validate() const {
        x.validate("x");
        y.validate("y");
    }

    auto operator<=>(const TargetLayout&) const = default;
};

/// Whether the variance regression produces sigma^2 directly or sigma.
enum class VarianceTarget { SigmaSquared, Sigma };

inline std::string_view to_string(VarianceTarget t) {
    return t == VarianceTarget::Sigma ? "sigma" : "sigma_squared";
}

inline VarianceTarget parse_variance_target(std::string_view s) {
    if (s == "sigma_squared") return VarianceTarget::SigmaSquared;
    if (s == "sigma") return VarianceTarget::Sigma;
    throw ParameterError("variance_target must be sigma_squared or sigma; got '" + std::string(s) + "'");
}

/// Regression constants for one axis.
///   skewness  |gamma1| = max(0, c + d * d_edge)
///   variance  e + f S^2 + g margin  (d_edge < -c/d),  h + i S^2  otherwise
///   mean      j + k (d_edge - l)^2  (d_edge < -c/d),  0          otherwise
struct AxisConstants {
    double c = 0.0, d = 0.0;
    double e = 0.0, f = 0.0, g = 0.0;
    double h = 1.0, i = 0.0;
    double j = 0.0, k = 0.0, l = 0.0;
    VarianceTarget variance_target = VarianceTarget::SigmaSquared;
    /// Edge side the mean constants were regressed against in raw screen
    /// coordinates. Negative means the constants are already edge-relative.
    EdgeSide mean_fitted_edge = EdgeSide::Negative;

    void validate() const {
        for (double v : {c, d, e, f, g, h, i, j, k, l}) {
            if (!std::isfinite(v)) throw ParameterError("axis constants must be finite");
        }
        if (c < 0.0) throw ParameterError("skewness intercept c must be >= 0");
        if (d > 0.0) throw ParameterError("skewness slope d must be <= 0");
        if (d == 0.0 && c > 0.0) {
            throw ParameterError("d = 0 with c > 0 gives a skew region that never ends");
        }
        if (mean_fitted_edge == EdgeSide::None) {
            throw ParameterError("mean_fitted_edge must be neg or pos");
        }
    }

    /// d_edge at which predicted skewness reaches zero (-c/d), in mm.
    double threshold() const { return d < 0.0 ? -c / d : 0.0; }
};

struct BaselineConstants {
    double a = 0.0;
    double b = 1.0;
};

struct ModelConstants {
    AxisConstants x;
    AxisConstants y;
    BaselineConstants baseline_x;
    BaselineConstants baseline_y;

    void validate() const {
        x.validate();
        y.validate();
    }
};

namespace detail {

inline double edge_sign(EdgeSide s) { return s == EdgeSide::Positive ? -1.0 : 1.0; }

inline std::string describe_constants(const AxisConstants& k, bool skew_branch) {
    std::ostringstream os;
    if (skew_branch) {
        os << "e=" << k.e << ", f=" << k.f << ", g=" << k.g;
    } else {
        os << "h=" << k.h << ", i=" << k.i;
    }
    return os.str();
}

}  // namespace detail

/// True when the axis lies inside the edge-affected region d_edge < -c/d.
inline bool in_skew_region(const AxisGeometry& axis, const AxisConstants& k) {
    return axis.edge != EdgeSide::None && axis.d_edge() < k.threshold();
}

inline double predict_gamma1(const AxisGeometry& axis, const AxisConstants& k) {
    axis.validate();
    if (axis.edge == EdgeSide::None) return 0.0;
    const double magnitude = std::max(0.0, k.c + k.d * axis.d_edge());
    return detail::edge_sign(axis.edge) * magnitude;
}

inline double predict_variance(const AxisGeometry& axis, const AxisConstants& k) {
    axis.validate();
    const bool skew = in_skew_region(axis, k);
    const double s2 = axis.size * axis.size;
    const double raw = skew ? k.e + k.f * s2 + k.g * axis.margin : k.h + k.i * s2;
    if (!(raw > 0.0)) {
        std::ostringstream os;
        os << "predicted " << (k.variance_target == VarianceTarget::Sigma ? "sigma" : "variance")
           << " " << raw << " is not positive for size " << axis.size << ", margin " << axis.margin
           << " (" << detail::describe_constants(k, skew) << ")";
        throw ModelDomainError(os.str());
    }
    return k.variance_target == VarianceTarget::Sigma ? raw * raw : raw;
}

inline double predict_mean(const AxisGeometry& axis, const AxisConstants& k) {
    axis.validate();
    if (!in_skew_region(axis, k)) return 0.0;
    const double t = axis.d_edge() - k.l;
    const double edge_relative = detail::edge_sign(k.mean_fitted_edge) * (k.j + k.k * t * t);
    return detail::edge_sign(axis.edge) * edge_relative;
}

struct AxisPrediction {
    MomentParams moments;
    SkewNormalParams params;
    double sr = 0.0;
    bool skew_region = false;
};

inline AxisPrediction predict_axis(const AxisGeometry& axis, const AxisConstants& k) {
    k.validate();
    AxisPrediction out;
    out.moments = {predict_mean(axis, k), predict_variance(axis, k), predict_gamma1(axis, k)};
    out.params = moments_to_skewnormal(out.moments);
    out.skew_region = in_skew_region(axis, k);
    const double half = 0.5 * axis.size;
    out.sr = skewnorm_interval(-half, half, out.params);
    return out;
}

inline double predict_axis_sr(const AxisGeometry& axis, const AxisConstants& k) {
    return predict_axis(axis, k).sr;
}

struct Prediction2D {
    AxisPrediction x;
    AxisPrediction y;
    double sr = 0.0;
};

inline Prediction2D predict_2d(const TargetLayout& layout, const ModelConstants& k) {
    layout.validate();
    Prediction2D out;
    out.x = predict_axis(layout.x, k.x);
    out.y = predict_axis(layout.y, k.y);
    out.sr = out.x.sr * out.y.sr;
    return out;
}

inline double predict_sr_2d(const TargetLayout& layout, const ModelConstants& k) {
    return predict_2d(layout, k).sr;
}

inline double baseline_variance(double size, double a, double b) {
    if (!(size > 0.0)) throw ParameterError("size must be positive");
    const double v = a * size * size + b;
    if (!(v > 0.0)) {
        std::ostringstream os;
        os << "baseline variance " << v << " is not positive for size " << size << " (a=" << a
           << ", b=" << b << ")";
        throw ModelDomainError(os.str());
    }
    return v;
}

inline double baseline_sr_1d(double size, double sigma) {
    if (!(size > 0.0)) throw ParameterError("size must be positive");
    if (!(sigma > 0.0)) throw ParameterError("sigma must be positive");
    return erf(size / (2.0 * std::numbers::sqrt2 * sigma));
}

struct BaselinePrediction {
    double sigma2_x = 0.0;
    double sigma2_y = 0.0;
    double sr_x = 0.0;
    double sr_y = 0.0;
    double sr = 0.0;
};

inline BaselinePrediction baseline_2d(const TargetLayout& layout, const ModelConstants& k) {
    layout.validate();
    BaselinePrediction out;
    out.sigma2_x = baseline_variance(layout.x.size, k.baseline_x.a, k.baseline_x.b);
    out.sigma2_y = baseline_variance(layout.y.size, k.baseline_y.a, k.baseline_y.b);
    out.sr_x = baseline_sr_1d(layout.x.size, std::sqrt(out.sigma2_x));
    out.sr_y = baseline_sr_1d(layout.y.size, std::sqrt(out.sigma2_y));
    out.sr = out.sr_x * out.sr_y;
    return out;
}

inline double baseline_sr_2d(const TargetLayout& layout, const ModelConstants& k) {
    return baseline_2d(layout, k).sr;
}

}  // namespace edgetap
