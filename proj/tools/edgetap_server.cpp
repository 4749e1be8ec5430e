// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

// HTTP front end for the prediction service.
//
//   edgetap_server [--addr host:port] [--presets DIR] [--ui DIR]
//
// The bind address falls back to EDGETAP_ADDR, then 127.0.0.1:8080.

#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "edgetap/service_http.hpp"

namespace {
httplib::Server* g_server = nullptr;
void stop(int) {
    if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge-aware touch prediction service", "edgetap_server"};
    std::string addr, presets, ui;
    app.add_option("--addr", addr, "host:port to bind (overrides EDGETAP_ADDR)");
    app.add_option("--presets", presets, "Directory of constants presets");
    app.add_option("--ui", ui, "Built UI bundle served under /");
    CLI11_PARSE(app, argc, argv);

    using namespace edgetap::service;
    try {
        const BindAddress bind = addr.empty() ? bind_address_from_env() : parse_bind_address(addr);
        const Service svc = presets.empty() ? Service() : Service(presets);
        httplib::Server server;
        register_routes(server, svc);
        if (!ui.empty() && !mount_static(server, ui)) {
            std::cerr << "error: UI directory " << ui << " not found\n";
            return 2;
        }
        g_server = &server;
        std::signal(SIGINT, stop);
        std::signal(SIGTERM, stop);
        int port = bind.port;
        if (port == 0) {
            port = server.bind_to_any_port(bind.host);
        } else if (!server.bind_to_port(bind.host, port)) {
            std::cerr << "error: cannot bind " << bind.host << ':' << port << '\n';
            return 3;
        }
        std::cerr << "listening on http://" << bind.host << ':' << port << " with " << svc.presets().size()
                  << " presets\n";
        server.listen_after_bind();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
