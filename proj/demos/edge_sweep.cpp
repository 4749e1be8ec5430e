// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

// Slides a 3.119 mm wide target toward the left screen edge and prints how
// the predicted tap distribution and success rate change, next to the plain
// Gaussian prediction that ignores the edge.

#include <cstdio>

#include "edgetap/edgetap.hpp"

int main() {
    namespace e = edgetap;
    const auto model = e::resolve_constants("exp1").constants;

    std::printf("%8s %8s %9s %8s %8s %8s %8s\n", "margin", "d_edge", "gamma1", "sigma2", "mu", "SR", "SR_base");
    for (double margin : {0.0, 0.5, 1.0, 1.56, 2.5, 3.119, 4.679, 6.0, 7.798, 12.0}) {
        const e::TargetLayout layout{{3.119, margin, e::EdgeSide::Negative}, {15.596, 63.45, e::EdgeSide::None}};
        const auto p = e::predict_2d(layout, model);
        const auto b = e::baseline_2d(layout, model);
        std::printf("%8.3f %8.3f %9.4f %8.4f %8.4f %8.4f %8.4f\n", margin, layout.x.d_edge(), p.x.moments.gamma1,
                    p.x.moments.sigma2, p.x.moments.mu, p.sr, b.sr);
    }
}
