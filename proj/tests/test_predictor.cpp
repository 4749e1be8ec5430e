// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "edgetap/error.hpp"
#include "edgetap/predictor.hpp"
#include "edgetap/simulation.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

namespace e = edgetap;
using e::AxisGeometry;
using e::EdgeSide;

TEST(AxisGeometry, DistanceToEdge) {
    EXPECT_DOUBLE_EQ((AxisGeometry{1.56, 1.56, EdgeSide::Negative}).d_edge(), 2.34);
    EXPECT_THROW((AxisGeometry{0.0, 1.0, EdgeSide::None}).validate(), e::ParameterError);
    EXPECT_THROW((AxisGeometry{1.0, -0.1, EdgeSide::None}).validate(), e::ParameterError);
    EXPECT_EQ(e::parse_edge_side("pos"), EdgeSide::Positive);
    EXPECT_THROW(e::parse_edge_side("left"), e::ParameterError);
}

TEST(AxisConstants, Validation) {
    auto k = support::exp1_x();
    EXPECT_NO_THROW(k.validate());
    k.d = 0.0;
    EXPECT_THROW(k.validate(), e::ParameterError);
    k.c = 0.0;
    EXPECT_NO_THROW(k.validate());
    k = support::exp1_x();
    k.c = -0.1;
    EXPECT_THROW(k.validate(), e::ParameterError);
    k = support::exp1_x();
    k.d = 0.1;
    EXPECT_THROW(k.validate(), e::ParameterError);
    EXPECT_NEAR(support::exp1_x().threshold(), 1.09 / 0.170, 1e-15);
}

TEST(PredictGamma1, HingeAndSign) {
    const auto k = support::exp1_x();
    EXPECT_EQ(e::predict_gamma1({1.0, 6.42 - 0.5, EdgeSide::Negative}, k), 0.0);
    EXPECT_GT(e::predict_gamma1({1.0, 6.40 - 0.5, EdgeSide::Negative}, k), 0.0);
    EXPECT_EQ(e::predict_gamma1({2.0, 9.0, EdgeSide::Negative}, k), 0.0);
    EXPECT_EQ(e::predict_gamma1({1.56, 0.0, EdgeSide::None}, k), 0.0);
    EXPECT_NEAR(e::predict_gamma1({1.56, 1.56, EdgeSide::Negative}, k), 0.6922, 1e-12);
    EXPECT_NEAR(e::predict_gamma1({1.56, 1.56, EdgeSide::Positive}, k), -0.6922, 1e-12);
}

TEST(PredictGamma1, ContinuousAtThreshold) {
    const auto k = support::exp1_x();
    const double t = k.threshold();
    for (double eps : {1e-3, 1e-6, 1e-9}) {
        EXPECT_LT(e::predict_gamma1({1.0, t - 0.5 - eps, EdgeSide::Negative}, k), 0.2 * eps * 10);
    }
}

TEST(PredictVariance, Branches) {
    const auto k3 = support::preset("exp3").x;
    EXPECT_NEAR(e::predict_variance({3.119, 20.0, EdgeSide::Positive}, k3), 2.69 + 0.0128 * 3.119 * 3.119, 1e-12);
    EXPECT_NEAR(e::predict_variance({3.119, 20.0, EdgeSide::Positive}, k3), 2.8145, 1e-4);

    const auto k = support::exp1_x();
    EXPECT_NEAR(e::predict_variance({3.119, 1.560, EdgeSide::Negative}, k), 0.155 + 0.0461 * 3.119 * 3.119 + 0.466 * 1.56,
                1e-12);
    EXPECT_NEAR(e::predict_variance({3.119, 1.560, EdgeSide::Negative}, k), 1.330428, 1e-6);
    EXPECT_NEAR(e::predict_variance({3.119, 0.0, EdgeSide::Negative}, k), 0.155 + 0.0461 * 3.119 * 3.119, 1e-12);
    // No edge always uses the far branch.
    EXPECT_NEAR(e::predict_variance({3.119, 0.0, EdgeSide::None}, k), 1.60 + 0.0205 * 3.119 * 3.119, 1e-12);
}

TEST(PredictVariance, SigmaTargetIsSquared) {
    auto k = support::exp1_x();
    k.variance_target = e::VarianceTarget::Sigma;
    const double s = 0.155 + 0.0461 * 3.119 * 3.119 + 0.466 * 1.56;
    EXPECT_NEAR(e::predict_variance({3.119, 1.560, EdgeSide::Negative}, k), s * s, 1e-12);
}

TEST(PredictVariance, NonPositiveIsModelDomainError) {
    auto k = support::exp1_x();
    k.e = -5.0;
    try {
        e::predict_variance({1.0, 0.0, EdgeSide::Negative}, k);
        FAIL() << "expected ModelDomainError";
    } catch (const e::ModelDomainError& err) {
        EXPECT_NE(std::string(err.what()).find("e="), std::string::npos) << err.what();
    }
    auto b = support::exp1_x();
    b.h = -10.0;
    EXPECT_THROW(e::predict_variance({1.0, 30.0, EdgeSide::Negative}, b), e::ModelDomainError);
}

TEST(PredictMean, QuadraticInSkewRegion) {
    const auto k = support::exp1_x();
    EXPECT_EQ(e::predict_mean({1.0, 7.0, EdgeSide::Negative}, k), 0.0);
    EXPECT_EQ(e::predict_mean({1.0, 0.0, EdgeSide::None}, k), 0.0);
    EXPECT_DOUBLE_EQ(e::predict_mean({1.0, 3.23, EdgeSide::Negative}, k), -0.393);
    EXPECT_NEAR(e::predict_mean({1.56, 0.0, EdgeSide::Negative}, k), -0.393 + 0.108 * (0.78 - 3.73) * (0.78 - 3.73),
                1e-12);
    EXPECT_NEAR(e::predict_mean({1.56, 0.0, EdgeSide::Negative}, k), 0.5469, 1e-4);
    EXPECT_NEAR(e::predict_mean({1.56, 0.0, EdgeSide::Positive}, k), -0.5469, 1e-4);
}

TEST(PredictMean, ConstantsFittedOnPositiveEdge) {
    auto k = support::exp1_x();
    k.mean_fitted_edge = EdgeSide::Positive;
    // Raw-frame constants from a positive-side fit reproduce themselves there.
    EXPECT_DOUBLE_EQ(e::predict_mean({1.0, 3.23, EdgeSide::Positive}, k), -0.393);
    EXPECT_DOUBLE_EQ(e::predict_mean({1.0, 3.23, EdgeSide::Negative}, k), 0.393);
}

TEST(PredictAxisSr, RevertsToBaseline) {
    const auto k = support::exp1_x();
    for (double s : {1.56, 3.119, 7.798}) {
        const AxisGeometry far{s, 15.0, EdgeSide::Negative};
        const double sigma = std::sqrt(1.60 + 0.0205 * s * s);
        EXPECT_NEAR(e::predict_axis_sr(far, k), e::erf(s / (2 * std::numbers::sqrt2 * sigma)), 1e-12);
        EXPECT_NEAR(e::predict_axis_sr(far, k), e::baseline_sr_1d(s, sigma), 1e-12);
    }
}

TEST(PredictAxisSr, LargeTargetCapturesEverything) {
    auto k = support::exp1_x();
    k.i = 0.0;
    const double sigma = std::sqrt(1.60);
    EXPECT_GE(e::predict_axis_sr({20 * sigma, 30.0, EdgeSide::None}, k), 1.0 - 1e-15);
}

TEST(PredictAxisSr, MirrorSymmetry) {
    for (const char* name : {"exp1", "exp2", "exp3"}) {
        const auto m = support::preset(name);
        for (const auto* k : {&m.x, &m.y}) {
            for (double s : {1.56, 3.119, 7.798}) {
                for (double margin : {0.0, 1.56, 3.9, 12.0}) {
                    const auto neg = e::predict_axis({s, margin, EdgeSide::Negative}, *k);
                    const auto pos = e::predict_axis({s, margin, EdgeSide::Positive}, *k);
                    EXPECT_EQ(neg.moments.gamma1, -pos.moments.gamma1);
                    EXPECT_EQ(neg.moments.mu, -pos.moments.mu);
                    EXPECT_NEAR(neg.sr, pos.sr, 1e-14);
                }
            }
        }
    }
}

TEST(PredictAxisSr, NondecreasingInSizeAwayFromEdges) {
    for (const char* name : {"exp1", "exp2", "exp3"}) {
        const auto m = support::preset(name);
        for (const auto* k : {&m.x, &m.y}) {
            const std::pair<double, EdgeSide> cases[] = {
                {0.0, EdgeSide::None}, {4.0, EdgeSide::None}, {15.0, EdgeSide::Negative}, {15.0, EdgeSide::Positive}};
            for (auto [margin, edge] : cases) {
                double prev = 0.0;
                for (double s = 0.5; s <= 12.0; s += 0.05) {
                    const double sr = e::predict_axis_sr({s, margin, edge}, *k);
                    EXPECT_GE(sr, prev) << name << " margin " << margin << " size " << s;
                    prev = sr;
                }
            }
        }
    }
}

TEST(PredictAxisSr, DefinedOnBothSidesOfThreshold) {
    const auto k = support::exp1_x();
    const double t = k.threshold();
    const double s = 2.0;
    for (double d : {t - 1e-9, t, t + 1e-9}) {
        const auto p = e::predict_axis({s, d - 0.5 * s, EdgeSide::Negative}, k);
        EXPECT_TRUE(std::isfinite(p.sr));
        EXPECT_GT(p.sr, 0.0);
        EXPECT_LT(p.sr, 1.0);
    }
    EXPECT_TRUE(e::in_skew_region({s, t - 1e-9 - 1.0, EdgeSide::Negative}, k));
    EXPECT_FALSE(e::in_skew_region({s, t - 1.0, EdgeSide::Negative}, k));
}

TEST(PredictAxisSr, MatchesMonteCarlo) {
    const auto k = support::exp1_x();
    const auto p = e::predict_axis({3.119, 0.0, EdgeSide::Negative}, k);
    const auto mc = e::mc_axis_sr(p.params, 3.119, 2'000'000, 99);
    EXPECT_NEAR(p.sr, mc.estimate, 3.5 * mc.standard_error);
}

TEST(PredictSr2d, ProductOfAxes) {
    const auto m = support::preset("exp3");
    const e::TargetLayout t{{3.119, 0.0, EdgeSide::Positive}, {3.119, 0.0, EdgeSide::Negative}};
    const auto p = e::predict_2d(t, m);
    EXPECT_EQ(p.sr, p.x.sr * p.y.sr);
    EXPECT_EQ(e::predict_sr_2d(t, m), p.sr);
    EXPECT_GT(p.sr, 0.0);
    EXPECT_LE(p.sr, std::min(p.x.sr, p.y.sr));

    // An enormous far target on x leaves the y factor.
    e::ModelConstants flat = m;
    flat.x.i = 0.0;
    const e::TargetLayout wide{{500.0, 300.0, EdgeSide::None}, {3.119, 0.0, EdgeSide::Negative}};
    EXPECT_NEAR(e::predict_sr_2d(wide, flat), e::predict_axis_sr(wide.y, m.y), 1e-12);

    e::ModelConstants same = m;
    same.y = same.x;
    const e::TargetLayout sq{{3.0, 1.0, EdgeSide::Negative}, {3.0, 1.0, EdgeSide::Negative}};
    const auto ps = e::predict_2d(sq, same);
    EXPECT_EQ(ps.x.sr, ps.y.sr);
    EXPECT_EQ(ps.sr, ps.x.sr * ps.x.sr);
}

TEST(PredictSr2d, MatchesTwoAxisMonteCarlo) {
    const auto m = support::preset("exp3");
    const e::TargetLayout t{{3.119, 0.0, EdgeSide::Positive}, {3.119, 0.0, EdgeSide::Negative}};
    const auto p = e::predict_2d(t, m);
    e::SkewNormalSampler sx(p.x.params), sy(p.y.params);
    e::Xoshiro256 rng(5);
    const std::size_t n = 2'000'000;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = sx(rng), y = sy(rng);
        hits += std::abs(x) <= 0.5 * 3.119 && std::abs(y) <= 0.5 * 3.119;
    }
    const double est = static_cast<double>(hits) / n;
    const double se = std::sqrt(est * (1 - est) / n);
    EXPECT_NEAR(p.sr, est, 3.5 * se);
}

TEST(Baseline, Variance) {
    EXPECT_EQ(e::baseline_variance(3.0, 0.0, 2.25), 2.25);
    EXPECT_NEAR(e::baseline_variance(3.119, 0.0175, 2.30), oracle_values::kBaselineVariance, 1e-14);
    EXPECT_NEAR(e::baseline_variance(4.0, 0.3, 0.0), 4 * e::baseline_variance(2.0, 0.3, 0.0), 1e-14);
    EXPECT_THROW(e::baseline_variance(1.0, -1.0, 0.5), e::ModelDomainError);
    EXPECT_THROW(e::baseline_variance(0.0, 1.0, 0.5), e::ParameterError);
}

TEST(Baseline, SuccessRate) {
    EXPECT_NEAR(e::baseline_sr_1d(1e6, 1.0), 1.0, 1e-15);
    const double w = 2 * std::numbers::sqrt2 * 1.3 * 0.4769362762044699;
    EXPECT_NEAR(e::baseline_sr_1d(w, 1.3), 0.5, 1e-14);
    const double sigma = std::sqrt(oracle_values::kBaselineVariance);
    EXPECT_NEAR(e::baseline_sr_1d(3.119, sigma), oracle_values::kBaselineSr, 1e-14);
    EXPECT_NEAR(e::baseline_sr_1d(3.119, 1.5717), 0.6789, 1e-4);
    double prev = 0.0;
    for (double s = 0.1; s < 10; s += 0.1) {
        const double v = e::baseline_sr_1d(s, 1.2);
        EXPECT_GT(v, prev);
        EXPECT_GT(e::baseline_sr_1d(s, 1.2), e::baseline_sr_1d(s, 1.3));
        prev = v;
    }
}

TEST(Baseline, TwoDimensional) {
    e::ModelConstants m;
    const double w = 2 * std::numbers::sqrt2 * 0.4769362762044699;
    m.baseline_x = {0.0, 1.0};
    m.baseline_y = {0.0, 1.0};
    const e::TargetLayout half{{w, 5.0, EdgeSide::None}, {w, 5.0, EdgeSide::None}};
    EXPECT_NEAR(e::baseline_sr_2d(half, m), 0.25, 1e-14);

    const auto k3 = support::preset("exp3");
    const e::TargetLayout t{{3.119, 0.0, EdgeSide::Positive}, {3.119, 0.0, EdgeSide::Negative}};
    const auto b = e::baseline_2d(t, k3);
    EXPECT_NEAR(b.sr_x, oracle_values::kBaselineSr, 1e-14);
    EXPECT_NEAR(b.sr_y, e::erf(3.119 / (2 * std::numbers::sqrt2 * std::sqrt(0.0107 * 3.119 * 3.119 + 2.15))), 1e-15);
    EXPECT_EQ(b.sr, b.sr_x * b.sr_y);
}

TEST(Presets, LoadVerbatim) {
    const auto f = e::load_constants(e::preset_dir() / "exp1.json");
    EXPECT_EQ(f.preset_name, "exp1");
    EXPECT_FALSE(f.source.empty());
    // Published pair is (intercept, slope); the loader swaps it.
    EXPECT_EQ(f.constants.baseline_x.a, 0.0236);
    EXPECT_EQ(f.constants.baseline_x.b, 1.50);
    const auto f3 = e::load_constants(e::preset_dir() / "exp3.json");
    EXPECT_EQ(f3.constants.baseline_x.a, 0.0175);
    EXPECT_EQ(f3.constants.baseline_x.b, 2.30);
    EXPECT_EQ(f3.constants.x.mean_fitted_edge, EdgeSide::Positive);
    EXPECT_EQ(e::list_presets(), (std::vector<std::string>{"exp1", "exp2", "exp3"}));
}

TEST(Presets, RoundTripThroughJson) {
    for (const char* name : {"exp1", "exp2", "exp3"}) {
        const auto f = e::resolve_constants(name);
        const auto g = e::constants_from_json(nlohmann::json::parse(e::constants_to_json(f).dump()));
        EXPECT_EQ(g.constants.x.c, f.constants.x.c);
        EXPECT_EQ(g.constants.y.l, f.constants.y.l);
        EXPECT_EQ(g.constants.baseline_x.a, f.constants.baseline_x.a);
        EXPECT_EQ(g.constants.baseline_y.b, f.constants.baseline_y.b);
        EXPECT_EQ(g.constants.y.mean_fitted_edge, f.constants.y.mean_fitted_edge);
    }
    EXPECT_THROW(e::resolve_constants("nope"), e::ParameterError);
    EXPECT_THROW(e::constants_from_json(nlohmann::json::parse(R"({"x": {"c": 1}})")), e::ParameterError);
}
