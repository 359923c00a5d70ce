#pragma once

// HTTP + WebSocket front end for SessionManager.
//
//   GET  /healthz                  200 "ok"
//   POST /sessions                 {"session_id": "..."}
//   GET  /sessions/{id}/sketch     sketch file
//   GET  /sessions/{id}/ws         WebSocket, JSON ops
//   GET  /<path>                   static files from ServerOptions::static_dir

#include <chrono>
#include <memory>
#include <string>

#include "circsim/lab/session.hpp"

namespace circsim::lab {

struct ServerOptions {
    std::string address = "127.0.0.1";
    unsigned short port = 8080;  // 0 picks a free port
    std::string static_dir;      // empty disables static serving
    std::chrono::milliseconds coalescing_window = kCoalescingWindow;
    SolveOptions solve;
};

class LabServer {
public:
    explicit LabServer(ServerOptions opts);
    ~LabServer();
    LabServer(const LabServer&) = delete;
    LabServer& operator=(const LabServer&) = delete;

    /// Binds and starts serving on a background thread; returns the port.
    unsigned short start();
    /// Serves on the calling thread until stop().
    void run();
    void stop();

    [[nodiscard]] SessionManager& sessions() noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace circsim::lab
