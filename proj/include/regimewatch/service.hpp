// Copyright 2026-present the regimewatch authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON-over-HTTP front end for a set of monitors.
//
//   POST /strategies                   config document      -> 201 {"strategy_id": ...}
//   GET  /strategies                                        -> 200 {"strategies": [...]}
//   GET  /strategies/{id}                                   -> 200 config document
//   POST /strategies/{id}/trades       one trade object     -> 200 {"reports": [...], ...}
//   GET  /strategies/{id}/report                            -> 200 {"reports": [...], ...}
//   POST /strategies/{id}/whatif       {"append":..,"mu":..} -> 200 scratch reports
//   GET  /strategies/{id}/curve?metric=W[&max_n=100][&t=0.1] -> 200 bound-vs-n series
//   GET  /healthz                                           -> 200
//
// Error bodies are {"error": message}. 400 malformed JSON, 404 unknown strategy or
// route, 409 duplicate id, 422 schema or invariant violation.
//
// With a journal directory each strategy persists as <id>.config.json plus an
// append-only <id>.jsonl trade log; reports are always recomputed from the log.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "regimewatch/monitor.hpp"

namespace httplib {
class Server;
}

namespace regimewatch::service {

inline constexpr std::string_view kPortEnvVar = "REGIMEWATCH_PORT";
inline constexpr int kDefaultPort = 8417;

struct Request {
    std::string method;
    std::string path;
    std::multimap<std::string, std::string> query;
    std::string body;
};

struct Response {
    int status = 200;
    std::string body;
};

class ServiceModel {
public:
    /// Without a directory the registry lives in memory only.
    explicit ServiceModel(std::optional<std::filesystem::path> journal_dir = std::nullopt);
    ~ServiceModel();

    ServiceModel(const ServiceModel&) = delete;
    ServiceModel& operator=(const ServiceModel&) = delete;

    Response handle(const Request& request);
    /// Convenience form; target may carry a ?query string.
    Response handle(std::string_view method, std::string_view target, std::string_view body = {});

    [[nodiscard]] std::vector<std::string> strategy_ids() const;
    /// Immutable view of a strategy's monitor; null when unknown.
    [[nodiscard]] std::shared_ptr<const Monitor> snapshot(const std::string& id) const;

private:
    struct Strategy;

    Response create_strategy(const Request& request);
    Response post_trade(Strategy& strategy, const Request& request);
    Response report(const Strategy& strategy) const;
    Response what_if(const Strategy& strategy, const Request& request) const;
    Response curve(const Strategy& strategy, const Request& request) const;

    void restore();
    std::string next_id();
    [[nodiscard]] std::shared_ptr<Strategy> find(const std::string& id) const;

    std::optional<std::filesystem::path> journal_dir_;
    mutable std::shared_mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<Strategy>> strategies_;
    std::uint64_t id_counter_ = 0;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = kDefaultPort;
    /// Served under "/" when set (the dashboard bundle).
    std::optional<std::filesystem::path> static_dir;
};

/// Adapts a ServiceModel onto cpp-httplib. start() returns once the socket is bound.
class HttpServer {
public:
    HttpServer(ServiceModel& model, ServerOptions options);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and serves on a background thread. Port 0 picks a free port.
    void start();
    /// Serves on the calling thread until stop() is called from elsewhere.
    void run();
    /// Asks the listener to exit without waiting; safe from a signal handler.
    void request_stop();
    /// Blocks until the background listener started by start() has exited.
    void wait();
    void stop();
    [[nodiscard]] int port() const noexcept { return bound_port_; }

private:
    void bind();

    ServiceModel& model_;
    ServerOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int bound_port_ = 0;
};

/// Port from the environment variable when set, otherwise the fallback. Throws on
/// a value that is not a port number.
int port_from_env(int fallback = kDefaultPort);

}  // namespace regimewatch::service
