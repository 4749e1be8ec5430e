// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Constants file schema:
//
//   {
//     "preset_name": "exp3",
//     "source": "...",
//     "x": {"c":..,"d":..,"e":..,"f":..,"g":..,"h":..,"i":..,"j":..,"k":..,"l":..,
//           "variance_target": "sigma_squared" | "sigma",
//           "mean_fitted_edge": "neg" | "pos",          (optional, default neg)
//           "baseline": {"a":.., "b":.., "transposed": false}},
//     "y": { ... }
//   }
//
// "transposed": true marks a baseline pair published as (b, a); the loader
// swaps them so that sigma^2 = a S^2 + b holds for the in-memory values.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgetap/error.hpp"
#include "edgetap/predictor.hpp"

namespace edgetap {

struct ConstantsFile {
    std::string preset_name;
    std::string source;
    ModelConstants constants;
};

namespace detail {

inline double required_number(const nlohmann::json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        throw ParameterError(where + "." + key + " must be a number");
    }
    return it->get<double>();
}

inline AxisConstants axis_from_json(const nlohmann::json& j, const std::string& where,
                                    BaselineConstants& baseline) {
    if (!j.is_object()) throw ParameterError(where + " must be an object");
    AxisConstants k;
    k.c = required_number(j, "c", where);
    k.d = required_number(j, "d", where);
    k.e = required_number(j, "e", where);
    k.f = required_number(j, "f", where);
    k.g = required_number(j, "g", where);
    k.h = required_number(j, "h", where);
    k.i = required_number(j, "i", where);
    k.j = required_number(j, "j", where);
    k.k = required_number(j, "k", where);
    k.l = required_number(j, "l", where);
    k.variance_target = parse_variance_target(j.value("variance_target", std::string("sigma_squared")));
    k.mean_fitted_edge = parse_edge_side(j.value("mean_fitted_edge", std::string("neg")));
    k.validate();
    const auto b = j.find("baseline");
    if (b == j.end() || !b->is_object()) throw ParameterError(where + ".baseline must be an object");
    baseline.a = required_number(*b, "a", where + ".baseline");
    baseline.b = required_number(*b, "b", where + ".baseline");
    if (b->value("transposed", false)) std::swap(baseline.a, baseline.b);
    return k;
}

}  // namespace detail

inline nlohmann::ordered_json axis_to_json(const AxisConstants& k, const BaselineConstants& b) {
    nlohmann::ordered_json j;
    j["c"] = k.c;
    j["d"] = k.d;
    j["e"] = k.e;
    j["f"] = k.f;
    j["g"] = k.g;
    j["h"] = k.h;
    j["i"] = k.i;
    j["j"] = k.j;
    j["k"] = k.k;
    j["l"] = k.l;
    j["variance_target"] = to_string(k.variance_target);
    j["mean_fitted_edge"] = to_string(k.mean_fitted_edge);
    j["baseline"] = {{"a", b.a}, {"b", b.b}};
    return j;
}

inline nlohmann::ordered_json constants_to_json(const ConstantsFile& f) {
    nlohmann::ordered_json j;
    j["preset_name"] = f.preset_name;
    j["source"] = f.source;
    j["x"] = axis_to_json(f.constants.x, f.constants.baseline_x);
    j["y"] = axis_to_json(f.constants.y, f.constants.baseline_y);
    return j;
}

inline ConstantsFile constants_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParameterError("constants document must be a JSON object");
    ConstantsFile f;
    f.preset_name = j.value("preset_name", std::string());
    f.source = j.value("source", std::string());
    if (!j.contains("x") || !j.contains("y")) {
        throw ParameterError("constants document needs both x and y axis objects");
    }
    f.constants.x = detail::axis_from_json(j.at("x"), "x", f.constants.baseline_x);
    f.constants.y = detail::axis_from_json(j.at("y"), "y", f.constants.baseline_y);
    return f;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParameterError(path.string() + ": " + e.what());
    }
}

inline ConstantsFile load_constants(const std::filesystem::path& path) {
    return constants_from_json(read_json_file(path));
}

/// Directory holding the shipped exp1/exp2/exp3 presets. EDGETAP_PRESET_DIR
/// overrides the compiled-in location.
inline std::filesystem::path preset_dir() {
    if (const char* env = std::getenv("EDGETAP_PRESET_DIR"); env && *env) return env;
#ifdef EDGETAP_DATA_DIR
    return std::filesystem::path(EDGETAP_DATA_DIR) / "presets";
#else
    return "data/presets";
#endif
}

inline std::filesystem::path design_dir() {
    if (const char* env = std::getenv("EDGETAP_DESIGN_DIR"); env && *env) return env;
#ifdef EDGETAP_DATA_DIR
    return std::filesystem::path(EDGETAP_DATA_DIR) / "designs";
#else
    return "data/designs";
#endif
}

/// Loads a constants file by path, or by preset name when no such file exists.
inline ConstantsFile resolve_constants(const std::string& path_or_name) {
    if (std::filesystem::exists(path_or_name)) return load_constants(path_or_name);
    const auto preset = preset_dir() / (path_or_name + ".json");
    if (std::filesystem::exists(preset)) return load_constants(preset);
    throw ParameterError("no constants file or preset named '" + path_or_name + "'");
}

inline std::vector<std::string> list_presets() {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(preset_dir(), ec)) {
        if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace edgetap
