// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

// Generates a synthetic left-edge experiment from known constants, runs the
// usual cleaning and aggregation, refits, and compares the recovered
// constants with the ones that generated the data.

#include <cstdio>

#include "edgetap/edgetap.hpp"

int main() {
    namespace e = edgetap;
    const auto truth = e::resolve_constants("exp1").constants;
    const auto trials = e::synth_experiment(truth, e::resolve_design("exp1"));

    const auto clean = e::filter_outliers_3sd(trials);
    const auto agg = e::aggregate(clean.kept, e::AggregationMode::PerParticipant);
    const auto fit = e::fit_all(agg.conditions, e::Axis::X);
    const auto cv = e::loocv(agg.conditions, e::Axis::X);

    std::printf("%zu taps, %zu dropped as outliers, %zu conditions\n", trials.size(), clean.removed.size(),
                agg.conditions.size());
    const auto& t = truth.x;
    const auto& f = fit.constants;
    std::printf("%4s %10s %10s\n", "", "true", "fitted");
    const char* names = "cdefghijkl";
    const double tv[] = {t.c, t.d, t.e, t.f, t.g, t.h, t.i, t.j, t.k, t.l};
    const double fv[] = {f.c, f.d, f.e, f.f, f.g, f.h, f.i, f.j, f.k, f.l};
    for (int i = 0; i < 10; ++i) std::printf("%4c %10.4f %10.4f\n", names[i], tv[i], fv[i]);
    std::printf("threshold %.3f mm (true %.3f)\n", fit.threshold, t.threshold());
    std::printf("SR  R2 %.4f  MAE %.4f  LOOCV R2 %.4f\n", fit.sr.r2, fit.sr.mae, cv.metrics.r2);
}
