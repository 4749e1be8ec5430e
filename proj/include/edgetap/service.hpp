// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Request handlers behind the HTTP service. Each handler maps a JSON body
// to (status, JSON body) and holds no per-request state; the transport
// binding lives in service_http.hpp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edgetap/constants_io.hpp"
#include "edgetap/error.hpp"
#include "edgetap/predictor.hpp"
#include "edgetap/rng.hpp"
#include "edgetap/simulation.hpp"
#include "edgetap/skewnormal.hpp"

namespace edgetap::service {

using Json = nlohmann::ordered_json;

inline constexpr std::size_t kMaxCurvePoints = 2048;
inline constexpr std::size_t kMaxPreviewSamples = 100000;
inline constexpr std::size_t kMaxPreviewBins = 512;

struct Response {
    int status = 200;
    Json body;
};

/// Validation failure tied to one request field.
class FieldError : public ParameterError {
public:
    FieldError(std::string field, const std::string& what) : ParameterError(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

namespace detail {

inline Json error_body(const std::string& message, const std::string& field = {}) {
    Json j;
    j["error"] = message;
    if (!field.empty()) j["field"] = field;
    return j;
}

inline double number_field(const nlohmann::json& req, const char* key) {
    const auto it = req.find(key);
    if (it == req.end()) throw FieldError(key, "is required");
    if (!it->is_number()) throw FieldError(key, "must be a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw FieldError(key, "must be finite");
    return v;
}

inline std::size_t count_field(const nlohmann::json& req, const char* key, std::size_t fallback, std::size_t lo,
                               std::size_t hi) {
    const auto it = req.find(key);
    if (it == req.end()) return fallback;
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
        throw FieldError(key, "must be a nonnegative integer");
    }
    const auto v = it->get<std::uint64_t>();
    if (v < lo || v > hi) {
        throw FieldError(key, "must be between " + std::to_string(lo) + " and " + std::to_string(hi));
    }
    return static_cast<std::size_t>(v);
}

inline EdgeSide edge_field(const nlohmann::json& req, const char* key) {
    const auto it = req.find(key);
    if (it == req.end()) return EdgeSide::None;
    if (!it->is_string()) throw FieldError(key, "must be one of neg, pos, none");
    try {
        return parse_edge_side(it->get<std::string>());
    } catch (const ParameterError&) {
        throw FieldError(key, "must be one of neg, pos, none");
    }
}

inline TargetLayout layout_from_request(const nlohmann::json& req) {
    TargetLayout t;
    t.x.size = number_field(req, "w");
    t.y.size = number_field(req, "h");
    t.x.margin = number_field(req, "margin_x");
    t.y.margin = number_field(req, "margin_y");
    t.x.edge = edge_field(req, "edge_x");
    t.y.edge = edge_field(req, "edge_y");
    if (!(t.x.size > 0.0)) throw FieldError("w", "must be positive");
    if (!(t.y.size > 0.0)) throw FieldError("h", "must be positive");
    if (!(t.x.margin >= 0.0)) throw FieldError("margin_x", "must be nonnegative");
    if (!(t.y.margin >= 0.0)) throw FieldError("margin_y", "must be nonnegative");
    return t;
}

inline Json axis_json(const AxisGeometry& geo, const AxisPrediction& p, const AxisConstants& k) {
    Json j;
    j["d_edge_mm"] = geo.d_edge();
    j["threshold_mm"] = k.threshold();
    j["skew_region"] = p.skew_region;
    j["gamma1"] = p.moments.gamma1;
    j["sigma2"] = p.moments.sigma2;
    j["mu"] = p.moments.mu;
    j["xi"] = p.params.xi;
    j["omega"] = p.params.omega;
    j["alpha"] = p.params.alpha;
    j["sr"] = p.sr;
    return j;
}

/// Evenly spaced positions covering the target and both predicted densities.
inline std::pair<double, double> plot_range(double size, const MomentParams& m, double baseline_sigma2) {
    const double sd = std::sqrt(m.sigma2);
    const double bsd = std::sqrt(baseline_sigma2);
    const double lo = std::min({-0.5 * size, m.mu - 4.0 * sd, -4.0 * bsd});
    const double hi = std::max({0.5 * size, m.mu + 4.0 * sd, 4.0 * bsd});
    return {lo, hi};
}

inline Json curve_json(double size, const AxisPrediction& p, double baseline_sigma2, std::size_t points) {
    const auto [lo, hi] = plot_range(size, p.moments, baseline_sigma2);
    const double bsd = std::sqrt(baseline_sigma2);
    Json xs = Json::array(), skew = Json::array(), base = Json::array();
    for (std::size_t i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(points - 1);
        const double x = lo + t * (hi - lo);
        xs.push_back(x);
        skew.push_back(skewnorm_pdf(x, p.params));
        base.push_back(std_normal_pdf(x / bsd) / bsd);
    }
    Json j;
    j["positions_mm"] = std::move(xs);
    j["skew_density"] = std::move(skew);
    j["baseline_density"] = std::move(base);
    j["target_lo_mm"] = -0.5 * size;
    j["target_hi_mm"] = 0.5 * size;
    return j;
}

}  // namespace detail

class Service {
public:
    struct Preset {
        nlohmann::json raw;  ///< file content as shipped
        ConstantsFile file;
    };

    explicit Service(const std::filesystem::path& dir = preset_dir()) {
        std::error_code ec;
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            Preset p;
            p.raw = read_json_file(f);
            p.file = constants_from_json(p.raw);
            presets_.emplace(f.stem().string(), std::move(p));
        }
    }

    const std::map<std::string, Preset>& presets() const { return presets_; }

    Response list_presets() const {
        Json list = Json::array();
        for (const auto& [name, p] : presets_) {
            Json item;
            item["name"] = name;
            item["source"] = p.file.source;
            item["constants"] = p.raw;
            list.push_back(std::move(item));
        }
        Json body;
        body["presets"] = std::move(list);
        return {200, std::move(body)};
    }

    Response predict(const std::string& text) const {
        return guarded(text, [&](const nlohmann::json& req) { return predict_impl(req); });
    }

    Response simulate_preview(const std::string& text) const {
        return guarded(text, [&](const nlohmann::json& req) { return preview_impl(req); });
    }

    /// Routing used by both the HTTP binding and the tests.
    Response handle(const std::string& method, const std::string& path, const std::string& body) const {
        if (path == "/presets") {
            if (method != "GET") return {405, detail::error_body("use GET for /presets")};
            return list_presets();
        }
        if (path == "/predict") {
            if (method != "POST") return {405, detail::error_body("use POST for /predict")};
            return predict(body);
        }
        if (path == "/simulate-preview") {
            if (method != "POST") return {405, detail::error_body("use POST for /simulate-preview")};
            return simulate_preview(body);
        }
        return {404, detail::error_body("no route for " + path)};
    }

private:
    template <class F>
    static Response guarded(const std::string& text, F&& f) {
        nlohmann::json req;
        try {
            req = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            return {400, detail::error_body(std::string("request body is not JSON: ") + e.what())};
        }
        if (!req.is_object()) return {400, detail::error_body("request body must be a JSON object")};
        try {
            return f(req);
        } catch (const FieldError& e) {
            return {400, detail::error_body(e.what(), e.field())};
        } catch (const ModelDomainError& e) {
            return {422, detail::error_body(e.what())};
        } catch (const ParameterError& e) {
            return {400, detail::error_body(e.what())};
        } catch (const nlohmann::json::exception& e) {
            return {400, detail::error_body(e.what())};
        }
    }

    ModelConstants constants_for(const nlohmann::json& req) const {
        if (req.contains("constants")) {
            try {
                return constants_from_json(req.at("constants")).constants;
            } catch (const ParameterError& e) {
                throw FieldError("constants", e.what());
            } catch (const nlohmann::json::exception& e) {
                throw FieldError("constants", e.what());
            }
        }
        const auto it = req.find("preset");
        if (it == req.end()) throw FieldError("preset", "give a preset name or inline constants");
        if (!it->is_string()) throw FieldError("preset", "must be a string");
        const auto p = presets_.find(it->get<std::string>());
        if (p == presets_.end()) throw FieldError("preset", "unknown preset '" + it->get<std::string>() + "'");
        return p->second.file.constants;
    }

    Response predict_impl(const nlohmann::json& req) const {
        const auto layout = detail::layout_from_request(req);
        const auto k = constants_for(req);
        const std::size_t points = detail::count_field(req, "curve_points", 0, 0, kMaxCurvePoints);
        const auto pred = predict_2d(layout, k);
        const auto base = baseline_2d(layout, k);

        Json body;
        body["sr"] = pred.sr;
        body["sr_x"] = pred.x.sr;
        body["sr_y"] = pred.y.sr;
        body["x"] = detail::axis_json(layout.x, pred.x, k.x);
        body["y"] = detail::axis_json(layout.y, pred.y, k.y);
        Json b;
        b["sr"] = base.sr;
        b["sr_x"] = base.sr_x;
        b["sr_y"] = base.sr_y;
        b["sigma2_x"] = base.sigma2_x;
        b["sigma2_y"] = base.sigma2_y;
        body["baseline"] = std::move(b);
        if (points > 0) {
            body["curves"]["x"] = detail::curve_json(layout.x.size, pred.x, base.sigma2_x, points);
            body["curves"]["y"] = detail::curve_json(layout.y.size, pred.y, base.sigma2_y, points);
        }
        return {200, std::move(body)};
    }

    Response preview_impl(const nlohmann::json& req) const {
        const auto layout = detail::layout_from_request(req);
        const auto k = constants_for(req);
        if (!req.contains("n")) throw FieldError("n", "is required");
        const std::size_t n = detail::count_field(req, "n", 0, 1, kMaxPreviewSamples);
        const std::size_t bins = detail::count_field(req, "bins", 60, 1, kMaxPreviewBins);
        std::uint64_t seed = 0;
        if (req.contains("seed")) {
            if (!req.at("seed").is_number_unsigned()) throw FieldError("seed", "must be a nonnegative integer");
            seed = req.at("seed").get<std::uint64_t>();
        }
        const auto pred = predict_2d(layout, k);
        const auto base = baseline_2d(layout, k);

        Json body;
        body["n"] = n;
        body["seed"] = seed;
        body["x"] = histogram(layout.x, pred.x, base.sigma2_x, n, bins, derive_stream(seed, 0, 0));
        body["y"] = histogram(layout.y, pred.y, base.sigma2_y, n, bins, derive_stream(seed, 1, 0));
        return {200, std::move(body)};
    }

    static Json histogram(const AxisGeometry& geo, const AxisPrediction& p, double baseline_sigma2, std::size_t n,
                          std::size_t bins, std::uint64_t stream) {
        const auto [lo, hi] = detail::plot_range(geo.size, p.moments, baseline_sigma2);
        const double width = (hi - lo) / static_cast<double>(bins);
        std::vector<std::size_t> counts(bins, 0);
        std::size_t below = 0, above = 0;
        SkewNormalSampler draw(p.params);
        Xoshiro256 rng(stream);
        for (std::size_t s = 0; s < n; ++s) {
            const double v = draw(rng);
            if (v < lo) {
                ++below;
            } else if (v >= hi) {
                ++above;
            } else {
                counts[std::min(bins - 1, static_cast<std::size_t>((v - lo) / width))]++;
            }
        }
        Json edges = Json::array(), cnt = Json::array(), dens = Json::array(), centers = Json::array(),
             pdf = Json::array(), cdf = Json::array();
        for (std::size_t b = 0; b <= bins; ++b) {
            const double e = b == bins ? hi : lo + static_cast<double>(b) * width;
            edges.push_back(e);
            cdf.push_back(skewnorm_cdf(e, p.params));
        }
        for (std::size_t b = 0; b < bins; ++b) {
            const double c = lo + (static_cast<double>(b) + 0.5) * width;
            cnt.push_back(counts[b]);
            dens.push_back(static_cast<double>(counts[b]) / (static_cast<double>(n) * width));
            centers.push_back(c);
            pdf.push_back(skewnorm_pdf(c, p.params));
        }
        Json j;
        j["bin_edges_mm"] = std::move(edges);
        j["counts"] = std::move(cnt);
        j["density"] = std::move(dens);
        j["below"] = below;
        j["above"] = above;
        j["overlay"]["centers_mm"] = std::move(centers);
        j["overlay"]["pdf"] = std::move(pdf);
        j["overlay"]["cdf_at_edges"] = std::move(cdf);
        j["params"] = {{"xi", p.params.xi}, {"omega", p.params.omega}, {"alpha", p.params.alpha}};
        return j;
    }

    std::map<std::string, Preset> presets_;
};

}  // namespace edgetap::service
