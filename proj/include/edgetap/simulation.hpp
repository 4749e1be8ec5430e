// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Seeded skew-normal sampling, Monte Carlo success rates, and synthetic
// experiments generated from a set of model constants.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgetap/constants_io.hpp"
#include "edgetap/error.hpp"
#include "edgetap/predictor.hpp"
#include "edgetap/rng.hpp"
#include "edgetap/skewnormal.hpp"
#include "edgetap/taplog.hpp"

namespace edgetap {

/// Draws from a skew-normal through X = xi + omega (delta |U0| + sqrt(1 - delta^2) U1).
class SkewNormalSampler {
public:
    explicit SkewNormalSampler(const SkewNormalParams& p) : p_(p) {
        p_.validate();
        delta_ = p_.delta();
        rest_ = std::sqrt(1.0 - delta_ * delta_);
    }

    double operator()(Xoshiro256& rng) {
        const double u0 = normal_(rng);
        const double u1 = normal_(rng);
        return p_.xi + p_.omega * (delta_ * std::abs(u0) + rest_ * u1);
    }

private:
    SkewNormalParams p_;
    double delta_ = 0.0;
    double rest_ = 1.0;
    NormalSampler normal_;
};

inline std::vector<double> sample_skewnormal(const SkewNormalParams& p, std::size_t n, std::uint64_t seed) {
    SkewNormalSampler draw(p);
    Xoshiro256 rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = draw(rng);
    return out;
}

struct McEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

/// Fraction of n draws landing in [-size/2, size/2].
inline McEstimate mc_axis_sr(const SkewNormalParams& p, double size, std::size_t n, std::uint64_t seed) {
    if (!(size > 0.0)) throw ParameterError("size must be positive");
    if (n == 0) throw ParameterError("sample count must be positive");
    SkewNormalSampler draw(p);
    Xoshiro256 rng(seed);
    const double half = 0.5 * size;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = draw(rng);
        hits += (v >= -half && v <= half);
    }
    const double est = static_cast<double>(hits) / static_cast<double>(n);
    return {est, std::sqrt(est * (1.0 - est) / static_cast<double>(n))};
}

struct AxisDesign {
    std::vector<double> sizes;
    std::vector<double> margins;
    EdgeSide edge = EdgeSide::None;
};

/// Full-factorial design: x.sizes x x.margins x y.sizes x y.margins conditions.
struct SimDesign {
    std::string name;
    AxisDesign x;
    AxisDesign y;
    std::size_t repetitions = 1;
    std::size_t participants = 1;
    std::uint64_t seed = 0;

    void validate() const {
        for (const auto* a : {&x, &y}) {
            if (a->sizes.empty() || a->margins.empty()) throw ParameterError("design grids must be nonempty");
            for (double s : a->sizes) {
                if (!(s > 0.0)) throw ParameterError("design sizes must be positive");
            }
            for (double m : a->margins) {
                if (!(m >= 0.0)) throw ParameterError("design margins must be nonnegative");
            }
        }
        if (repetitions == 0 || participants == 0) {
            throw ParameterError("repetitions and participants must be positive");
        }
    }

    std::vector<TargetLayout> conditions() const {
        std::vector<TargetLayout> out;
        for (double sx : x.sizes)
            for (double mx : x.margins)
                for (double sy : y.sizes)
                    for (double my : y.margins) out.push_back({{sx, mx, x.edge}, {sy, my, y.edge}});
        return out;
    }
};

inline SimDesign design_from_json(const nlohmann::json& j) {
    auto axis = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_object()) {
            throw ParameterError(std::string("design.") + key + " must be an object");
        }
        const auto& a = j.at(key);
        AxisDesign d;
        d.sizes = a.at("sizes").get<std::vector<double>>();
        d.margins = a.at("margins").get<std::vector<double>>();
        d.edge = parse_edge_side(a.value("edge", std::string("none")));
        return d;
    };
    SimDesign d;
    d.name = j.value("name", std::string());
    d.x = axis("x");
    d.y = axis("y");
    d.repetitions = j.value("repetitions", std::size_t{1});
    d.participants = j.value("participants", std::size_t{1});
    d.seed = j.value("seed", std::uint64_t{0});
    d.validate();
    return d;
}

inline SimDesign load_design(const std::filesystem::path& path) {
    try {
        return design_from_json(read_json_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(path.string() + ": " + e.what());
    }
}

inline SimDesign resolve_design(const std::string& path_or_name) {
    if (std::filesystem::exists(path_or_name)) return load_design(path_or_name);
    const auto preset = design_dir() / (path_or_name + ".json");
    if (std::filesystem::exists(preset)) return load_design(preset);
    throw ParameterError("no design file or preset named '" + path_or_name + "'");
}

inline std::string participant_label(std::size_t index, std::size_t count) {
    const std::size_t width = count < 100 ? 2 : std::to_string(count).size();
    auto s = std::to_string(index + 1);
    return "p" + std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

/// Every participant taps every condition `repetitions` times. Each
/// (condition, participant) cell draws from its own substream, so cells can
/// be generated in any order without changing the output.
inline std::vector<TapTrial> synth_experiment(const ModelConstants& k, const SimDesign& design) {
    k.validate();
    design.validate();
    const auto layouts = design.conditions();
    std::vector<SkewNormalSampler> sx, sy;
    sx.reserve(layouts.size());
    sy.reserve(layouts.size());
    for (const auto& layout : layouts) {
        sx.emplace_back(predict_axis(layout.x, k.x).params);
        sy.emplace_back(predict_axis(layout.y, k.y).params);
    }
    std::vector<TapTrial> out;
    out.reserve(layouts.size() * design.participants * design.repetitions);
    for (std::size_t p = 0; p < design.participants; ++p) {
        const auto label = participant_label(p, design.participants);
        for (std::size_t c = 0; c < layouts.size(); ++c) {
            Xoshiro256 rng(derive_stream(design.seed, c, p));
            auto draw_x = sx[c];
            auto draw_y = sy[c];
            for (std::size_t r = 0; r < design.repetitions; ++r) {
                TapTrial t;
                t.participant = label;
                t.layout = layouts[c];
                t.tap_x = draw_x(rng);
                t.tap_y = draw_y(rng);
                t.repetition = static_cast<std::int64_t>(r + 1);
                out.push_back(std::move(t));
            }
        }
    }
    return out;
}

}  // namespace edgetap
