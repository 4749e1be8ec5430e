// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>

#include <httplib.h>

#include "edgetap/error.hpp"
#include "edgetap/service.hpp"

namespace edgetap::service {

struct BindAddress {
    std::string host = "127.0.0.1";
    int port = 8080;
};

/// Parses "host:port", ":port" or "port".
inline BindAddress parse_bind_address(const std::string& s) {
    BindAddress out;
    const auto colon = s.rfind(':');
    std::string port = s;
    if (colon != std::string::npos) {
        if (colon > 0) out.host = s.substr(0, colon);
        port = s.substr(colon + 1);
    }
    try {
        std::size_t used = 0;
        const int p = std::stoi(port, &used);
        if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
        out.port = p;
    } catch (const std::exception&) {
        throw ParameterError("bad bind address '" + s + "', expected host:port");
    }
    return out;
}

inline BindAddress bind_address_from_env() {
    if (const char* env = std::getenv("EDGETAP_ADDR"); env && *env) return parse_bind_address(env);
    return {};
}

inline void register_routes(httplib::Server& server, const Service& svc) {
    auto reply = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get("/presets", [&svc, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, svc.list_presets());
    });
    server.Post("/predict", [&svc, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, svc.predict(req.body));
    });
    server.Post("/simulate-preview", [&svc, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, svc.simulate_preview(req.body));
    });
}

/// Serves a built UI bundle under "/". Returns false when the directory is missing.
inline bool mount_static(httplib::Server& server, const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) return false;
    return server.set_mount_point("/", dir.string());
}

}  // namespace edgetap::service
