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

#include "regimewatch/service.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <httplib.h>

#include "regimewatch/io.hpp"

namespace regimewatch::service {

using io::json;

namespace {

constexpr std::string_view kConfigSuffix = ".config.json";
constexpr std::string_view kJournalSuffix = ".jsonl";

Response json_response(int status, const json& body) {
    return {status, body.dump()};
}

Response error(int status, const std::string& message) {
    return json_response(status, json{{"error", message}});
}

bool valid_id(std::string_view id) {
    if (id.empty() || id.size() > 128) {
        return false;
    }
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
               c == '.';
    }) && id.front() != '.';
}

std::vector<std::string_view> split_path(std::string_view path) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (pos < path.size()) {
        if (path[pos] == '/') {
            ++pos;
            continue;
        }
        const std::size_t end = std::min(path.find('/', pos), path.size());
        parts.push_back(path.substr(pos, end - pos));
        pos = end;
    }
    return parts;
}

std::optional<std::string> query_value(const Request& request, const std::string& key) {
    const auto it = request.query.find(key);
    if (it == request.query.end()) {
        return std::nullopt;
    }
    return it->second;
}

json reports_body(const std::string& id, const Monitor& monitor, const std::vector<BoundReport>& reports) {
    SignalTier worst = SignalTier::Normal;
    for (const BoundReport& r : reports) {
        worst = std::max(worst, r.tier);
    }
    return json{{"strategy_id", id},
                {"trades", monitor.journal().size()},
                {"overall_tier", to_string(worst)},
                {"reports", io::reports_to_json(reports)}};
}

void append_line(const std::filesystem::path& path, const std::string& line) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << line << '\n';
    out.flush();
    if (!out) {
        throw std::runtime_error("cannot append to journal " + path.string());
    }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        out << text << '\n';
        if (!out) {
            throw std::runtime_error("cannot write " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

struct ServiceModel::Strategy {
    std::string id;
    std::optional<std::filesystem::path> journal;

    // Writers take write_mutex for the whole update; readers only copy the pointer.
    std::mutex write_mutex;
    mutable std::mutex snapshot_mutex;
    std::shared_ptr<const Monitor> monitor;

    std::shared_ptr<const Monitor> load() const {
        std::lock_guard lock(snapshot_mutex);
        return monitor;
    }
    void publish(std::shared_ptr<const Monitor> next) {
        std::lock_guard lock(snapshot_mutex);
        monitor = std::move(next);
    }
};

ServiceModel::ServiceModel(std::optional<std::filesystem::path> journal_dir) : journal_dir_(std::move(journal_dir)) {
    if (journal_dir_) {
        std::filesystem::create_directories(*journal_dir_);
        restore();
    }
}

ServiceModel::~ServiceModel() = default;

void ServiceModel::restore() {
    std::vector<std::filesystem::path> configs;
    for (const auto& entry : std::filesystem::directory_iterator(*journal_dir_)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > kConfigSuffix.size() && name.ends_with(kConfigSuffix)) {
            configs.push_back(entry.path());
        }
    }
    std::sort(configs.begin(), configs.end());
    for (const auto& path : configs) {
        const std::string name = path.filename().string();
        const std::string id = name.substr(0, name.size() - kConfigSuffix.size());
        StrategyConfig config = io::load_config(path);
        config.strategy_id = id;

        const auto journal = *journal_dir_ / (id + std::string(kJournalSuffix));
        std::vector<TradeRecord> trades;
        if (std::filesystem::exists(journal)) {
            std::ifstream in(journal);
            trades = io::parse_trades_jsonl(in);
        }
        auto strategy = std::make_shared<Strategy>();
        strategy->id = id;
        strategy->journal = journal;
        strategy->monitor = std::make_shared<const Monitor>(Monitor::replay(std::move(config), trades));
        strategies_.emplace(id, std::move(strategy));
    }
}

std::vector<std::string> ServiceModel::strategy_ids() const {
    std::shared_lock lock(registry_mutex_);
    std::vector<std::string> ids;
    ids.reserve(strategies_.size());
    for (const auto& [id, s] : strategies_) {
        ids.push_back(id);
    }
    return ids;
}

std::shared_ptr<ServiceModel::Strategy> ServiceModel::find(const std::string& id) const {
    std::shared_lock lock(registry_mutex_);
    const auto it = strategies_.find(id);
    return it == strategies_.end() ? nullptr : it->second;
}

std::shared_ptr<const Monitor> ServiceModel::snapshot(const std::string& id) const {
    const auto strategy = find(id);
    return strategy ? strategy->load() : nullptr;
}

std::string ServiceModel::next_id() {
    // Caller holds the registry lock exclusively.
    for (;;) {
        std::string id = "strategy-" + std::to_string(++id_counter_);
        if (!strategies_.contains(id)) {
            return id;
        }
    }
}

Response ServiceModel::handle(std::string_view method, std::string_view target, std::string_view body) {
    Request request;
    request.method = std::string(method);
    request.body = std::string(body);
    const std::size_t q = target.find('?');
    request.path = std::string(target.substr(0, q));
    if (q != std::string_view::npos) {
        for (std::string_view rest = target.substr(q + 1); !rest.empty();) {
            const std::size_t amp = rest.find('&');
            const std::string_view pair = rest.substr(0, amp);
            const std::size_t eq = pair.find('=');
            request.query.emplace(std::string(pair.substr(0, eq)),
                                  eq == std::string_view::npos ? std::string() : std::string(pair.substr(eq + 1)));
            rest = amp == std::string_view::npos ? std::string_view{} : rest.substr(amp + 1);
        }
    }
    return handle(request);
}

Response ServiceModel::handle(const Request& request) {
    const auto parts = split_path(request.path);
    const std::string& method = request.method;
    try {
        if (parts.size() == 1 && parts[0] == "healthz" && method == "GET") {
            return json_response(200, json{{"status", "ok"}});
        }
        if (parts.empty() || parts[0] != "strategies") {
            return error(404, "no route for " + method + " " + request.path);
        }
        if (parts.size() == 1) {
            if (method == "POST") {
                return create_strategy(request);
            }
            if (method == "GET") {
                return json_response(200, json{{"strategies", strategy_ids()}});
            }
            return error(405, "method not allowed");
        }

        const auto strategy = find(std::string(parts[1]));
        if (!strategy) {
            return error(404, "unknown strategy '" + std::string(parts[1]) + "'");
        }
        if (parts.size() == 2 && method == "GET") {
            return json_response(200, io::config_to_json(strategy->load()->config()));
        }
        if (parts.size() == 3) {
            const std::string_view leaf = parts[2];
            if (leaf == "trades" && method == "POST") {
                return post_trade(*strategy, request);
            }
            if (leaf == "report" && method == "GET") {
                return report(*strategy);
            }
            if (leaf == "whatif" && method == "POST") {
                return what_if(*strategy, request);
            }
            if (leaf == "curve" && method == "GET") {
                return curve(*strategy, request);
            }
        }
        return error(404, "no route for " + method + " " + request.path);
    } catch (const json::exception& e) {
        return error(400, e.what());
    } catch (const std::exception& e) {
        return error(500, e.what());
    }
}

Response ServiceModel::create_strategy(const Request& request) {
    json body;
    try {
        body = json::parse(request.body);
    } catch (const json::parse_error& e) {
        return error(400, e.what());
    }
    StrategyConfig config;
    try {
        config = io::config_from_json(body);
    } catch (const std::exception& e) {
        return error(422, e.what());
    }
    if (!config.strategy_id.empty() && !valid_id(config.strategy_id)) {
        return error(422, "strategy_id may only contain letters, digits, '-', '_' and '.'");
    }

    std::unique_lock lock(registry_mutex_);
    if (config.strategy_id.empty()) {
        config.strategy_id = next_id();
    } else if (strategies_.contains(config.strategy_id)) {
        return error(409, "strategy '" + config.strategy_id + "' already exists");
    }
    try {
        config.validate();
    } catch (const std::exception& e) {
        return error(422, e.what());
    }

    auto strategy = std::make_shared<Strategy>();
    strategy->id = config.strategy_id;
    if (journal_dir_) {
        strategy->journal = *journal_dir_ / (config.strategy_id + std::string(kJournalSuffix));
        write_file(*journal_dir_ / (config.strategy_id + std::string(kConfigSuffix)),
                   io::config_to_json(config).dump(2));
        std::ofstream(*strategy->journal, std::ios::trunc);
    }
    strategy->monitor = std::make_shared<const Monitor>(config);
    strategies_.emplace(config.strategy_id, strategy);
    return json_response(201, json{{"strategy_id", config.strategy_id}});
}

Response ServiceModel::post_trade(Strategy& strategy, const Request& request) {
    json body;
    try {
        body = json::parse(request.body);
    } catch (const json::parse_error& e) {
        return error(400, e.what());
    }
    TradeRecord trade;
    try {
        trade = io::trade_from_json(body);
    } catch (const std::exception& e) {
        return error(422, e.what());
    }

    std::lock_guard writer(strategy.write_mutex);
    auto next = std::make_shared<Monitor>(*strategy.load());
    try {
        next->update(trade);
    } catch (const DuplicateTrade& e) {
        return error(409, e.what());
    } catch (const std::exception& e) {
        return error(422, e.what());
    }
    // The journal line lands before the new state becomes visible.
    if (strategy.journal) {
        append_line(*strategy.journal, io::trade_to_json(trade).dump());
    }
    strategy.publish(next);
    return json_response(200, reports_body(strategy.id, *next, next->latest()));
}

Response ServiceModel::report(const Strategy& strategy) const {
    const auto monitor = strategy.load();
    json body = reports_body(strategy.id, *monitor, monitor->latest());
    if (monitor->journal().empty()) {
        body["status"] = "no completed trades";
    }
    return json_response(200, body);
}

Response ServiceModel::what_if(const Strategy& strategy, const Request& request) const {
    json body;
    try {
        body = json::parse(request.body.empty() ? std::string("{}") : request.body);
    } catch (const json::parse_error& e) {
        return error(400, e.what());
    }
    const auto monitor = strategy.load();
    try {
        const WhatIf hypothetical = io::whatif_from_json(body);
        return json_response(200, reports_body(strategy.id, *monitor, monitor->what_if(hypothetical)));
    } catch (const std::exception& e) {
        return error(422, e.what());
    }
}

Response ServiceModel::curve(const Strategy& strategy, const Request& request) const {
    const auto monitor = strategy.load();
    const StrategyConfig& config = monitor->config();
    try {
        const std::string name = query_value(request, "metric").value_or(config.metrics.front().spec.name);
        const auto it = std::find_if(config.metrics.begin(), config.metrics.end(),
                                     [&](const TrackedMetric& m) { return m.spec.name == name; });
        if (it == config.metrics.end()) {
            return error(422, "unknown metric '" + name + "'");
        }

        double t = 0.0;
        if (const auto text = query_value(request, "t")) {
            t = io::parse_decimal(*text);
        } else {
            const auto& latest = monitor->latest();
            const auto r = std::find_if(latest.begin(), latest.end(),
                                        [&](const BoundReport& b) { return b.metric == name; });
            if (r == latest.end()) {
                return error(422, "no completed trades; pass t explicitly");
            }
            t = r->tolerance_t;
        }
        std::int64_t max_n = std::max<std::int64_t>(100, 2 * static_cast<std::int64_t>(monitor->journal().size()));
        if (const auto text = query_value(request, "max_n")) {
            const auto res = std::from_chars(text->data(), text->data() + text->size(), max_n);
            if (res.ec != std::errc{} || res.ptr != text->data() + text->size() || max_n < 1 || max_n > 100000) {
                return error(422, "max_n must be an integer in [1, 100000]");
            }
        }
        const BoundCurve c = bound_curve(it->spec.bounds, it->committed_mu, t, it->direction, max_n);
        return json_response(200, json{{"strategy_id", strategy.id},
                                       {"metric", name},
                                       {"mu", it->committed_mu},
                                       {"t", t},
                                       {"direction", to_string(it->direction)},
                                       {"n", c.n},
                                       {"p_exp", c.p_exp},
                                       {"p_tight", c.p_tight}});
    } catch (const std::exception& e) {
        return error(422, e.what());
    }
}

HttpServer::HttpServer(ServiceModel& model, ServerOptions options)
    : model_(model), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        Request request;
        request.method = req.method;
        request.path = req.path;
        request.body = req.body;
        for (const auto& [k, v] : req.params) {
            request.query.emplace(k, v);
        }
        const Response out = model_.handle(request);
        res.status = out.status;
        res.set_content(out.body, "application/json");
    };
    for (const char* pattern : {R"(/healthz)", R"(/strategies(/.*)?)"}) {
        server_->Get(pattern, forward);
        server_->Post(pattern, forward);
    }
    if (options_.static_dir) {
        server_->set_mount_point("/", options_.static_dir->string());
    }
}

HttpServer::~HttpServer() {
    stop();
}

void HttpServer::bind() {
    if (options_.port == 0) {
        bound_port_ = server_->bind_to_any_port(options_.host);
    } else {
        bound_port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
    }
    if (bound_port_ <= 0) {
        throw std::runtime_error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
    }
}

void HttpServer::start() {
    bind();
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void HttpServer::run() {
    bind();
    server_->listen_after_bind();
}

void HttpServer::request_stop() {
    server_->stop();
}

void HttpServer::wait() {
    if (thread_.joinable()) {
        thread_.join();
    }
}

void HttpServer::stop() {
    request_stop();
    wait();
}

int port_from_env(int fallback) {
    const char* value = std::getenv(std::string(kPortEnvVar).c_str());
    if (value == nullptr || *value == '\0') {
        return fallback;
    }
    int port = 0;
    const std::string_view text(value);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), port);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || port < 0 || port > 65535) {
        throw std::invalid_argument(std::string(kPortEnvVar) + " must be a port number, got '" + value + "'");
    }
    return port;
}

}  // namespace regimewatch::service
