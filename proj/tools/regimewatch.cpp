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

// regimewatch command-line front end: bounds, monitor, whatif, simulate, serve.

#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regimewatch/bounds.hpp"
#include "regimewatch/io.hpp"
#include "regimewatch/kernels.hpp"
#include "regimewatch/mc_oracle.hpp"
#include "regimewatch/monitor.hpp"
#include "regimewatch/rng.hpp"
#include "regimewatch/service.hpp"

namespace rw = regimewatch;
using rw::io::json;

namespace {

constexpr int kValidationFailure = 1;

struct BoundsArgs {
    std::optional<double> mu;
    std::optional<double> xbar;
    std::optional<double> t;
    std::int64_t n = 0;
    double a = 0.0;
    double b = 1.0;
    std::string direction = "shortfall";
    bool json = false;
};

struct MonitorArgs {
    std::string config;
    std::string trades;
    bool json = false;
};

struct WhatIfArgs {
    std::string config;
    std::string trades;
    std::vector<std::string> append;
    std::vector<std::string> mu;
    bool json = false;
};

struct SimulateArgs {
    std::int64_t reps = 100'000;
    std::uint64_t seed = 20240611;
    unsigned threads = 0;
    std::string csv;
};

struct ServeArgs {
    std::string host = "127.0.0.1";
    std::optional<int> port;
    std::string journal_dir = "journal";
    std::string static_dir;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

int run_bounds(const BoundsArgs& args) {
    const rw::Bounds bounds(args.a, args.b);
    const auto direction = rw::parse_adverse_direction(args.direction);
    double t = 0.0;
    if (args.t) {
        t = *args.t;
    } else if (args.mu && args.xbar) {
        const double gap = direction == rw::AdverseDirection::Shortfall ? *args.mu - *args.xbar : *args.xbar - *args.mu;
        t = std::max(0.0, gap);
    } else {
        throw std::invalid_argument("give --t, or both --mu and --xbar");
    }
    const rw::SampleCount n(args.n);
    const double t_dot = t / bounds.width();
    const rw::BoundValue p_exp = rw::exp_bound(t_dot, n);

    std::optional<rw::BoundValue> p_tight;
    if (args.mu) {
        const rw::NormalizedPair pair = rw::normalize(*args.mu, t, bounds);
        const auto tail = direction == rw::AdverseDirection::Excess ? rw::Tail::upper : rw::Tail::lower;
        p_tight = rw::BoundValue(std::min(rw::tight_bound(pair, n, tail).value(), p_exp.value()));
    }

    if (args.json) {
        json out{{"t", t}, {"t_dot", t_dot}, {"n", args.n}, {"p_exp", p_exp.value()}};
        if (p_tight) {
            out["mu"] = *args.mu;
            out["p_tight"] = p_tight->value();
        }
        std::cout << out.dump() << '\n';
    } else {
        std::cout << "t=" << fmt(t) << " n=" << args.n << " p_exp=" << fmt(p_exp.value());
        if (p_tight) {
            std::cout << " p_tight=" << fmt(p_tight->value());
        }
        std::cout << '\n';
    }
    return 0;
}

rw::StrategyConfig config_from_flag(const std::string& flag) {
    std::string path = flag;
    if (path.empty()) {
        const char* env = std::getenv(std::string(rw::io::kConfigEnvVar).c_str());
        if (env == nullptr || *env == '\0') {
            throw std::invalid_argument("no --config given and " + std::string(rw::io::kConfigEnvVar) + " is unset");
        }
        path = env;
    }
    return rw::io::load_config(path);
}

void print_table_header() {
    std::printf("%-12s %-8s %6s %10s %10s %10s %12s %12s  %s\n", "trade", "metric", "n", "mean", "mu", "t", "p_exp",
                "p_tight", "tier");
}

void print_table_rows(const std::string& trade_id, const std::vector<rw::BoundReport>& reports) {
    for (const rw::BoundReport& r : reports) {
        std::printf("%-12s %-8s %6lld %10.6g %10.6g %10.6g %12.6g %12.6g  %s\n", trade_id.c_str(), r.metric.c_str(),
                    static_cast<long long>(r.n), r.observed_mean, r.committed_mu, r.tolerance_t, r.p_exp.value(),
                    r.p_tight.value(), std::string(rw::to_string(r.tier)).c_str());
    }
}

rw::SignalTier worst_tier(const std::vector<rw::BoundReport>& reports) {
    rw::SignalTier worst = rw::SignalTier::Normal;
    for (const auto& r : reports) {
        worst = std::max(worst, r.tier);
    }
    return worst;
}

int run_monitor(const MonitorArgs& args) {
    const rw::StrategyConfig config = config_from_flag(args.config);
    const auto trades = rw::io::parse_trades(args.trades);
    if (trades.empty()) {
        throw rw::NoCompletedTrades();
    }
    rw::Monitor monitor(config);
    json steps = json::array();
    if (!args.json) {
        print_table_header();
    }
    for (const rw::TradeRecord& trade : trades) {
        const auto& reports = monitor.update(trade);
        if (args.json) {
            steps.push_back({{"trade_id", trade.trade_id}, {"reports", rw::io::reports_to_json(reports)}});
        } else {
            print_table_rows(trade.trade_id, reports);
        }
    }
    if (args.json) {
        std::cout << json{{"strategy_id", config.strategy_id},
                          {"steps", steps},
                          {"overall_tier", rw::to_string(monitor.overall_tier())}}
                         .dump()
                  << '\n';
    } else {
        std::cout << "overall tier: " << rw::to_string(monitor.overall_tier()) << '\n';
    }
    return 0;
}

// "W=0,0,1" -> ("W", {0, 0, 1})
std::pair<std::string, std::string> split_assignment(const std::string& text, const char* flag) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument(std::string(flag) + " expects METRIC=VALUE, got '" + text + "'");
    }
    return {text.substr(0, eq), text.substr(eq + 1)};
}

int run_whatif(const WhatIfArgs& args) {
    const rw::StrategyConfig config = config_from_flag(args.config);
    std::vector<rw::TradeRecord> trades;
    if (!args.trades.empty()) {
        trades = rw::io::parse_trades(args.trades);
    }
    const rw::Monitor monitor = rw::Monitor::replay(config, trades);

    rw::WhatIf hypothetical;
    for (const std::string& a : args.append) {
        auto [metric, values] = split_assignment(a, "--append");
        auto& dest = hypothetical.appended[metric];
        std::size_t pos = 0;
        while (pos <= values.size()) {
            const auto comma = std::min(values.find(',', pos), values.size());
            dest.push_back(rw::io::parse_decimal(std::string_view(values).substr(pos, comma - pos)));
            pos = comma + 1;
        }
    }
    for (const std::string& m : args.mu) {
        auto [metric, value] = split_assignment(m, "--mu");
        hypothetical.alternative_mu[metric] = rw::io::parse_decimal(value);
    }

    const auto reports = monitor.what_if(hypothetical);
    if (args.json) {
        std::cout << json{{"strategy_id", config.strategy_id},
                          {"hypothetical", rw::io::whatif_to_json(hypothetical)},
                          {"reports", rw::io::reports_to_json(reports)},
                          {"overall_tier", rw::to_string(worst_tier(reports))}}
                         .dump()
                  << '\n';
    } else {
        print_table_header();
        print_table_rows("what-if", reports);
        std::cout << "overall tier: " << rw::to_string(worst_tier(reports)) << '\n';
    }
    return 0;
}

int run_simulate(const SimulateArgs& args) {
    const auto suite = rw::mc::standard_suite(args.seed);
    const auto t_grid = rw::mc::standard_t_grid();
    const auto n_grid = rw::mc::standard_n_grid();
    const auto rows = rw::mc::run_suite(suite, t_grid, n_grid, {args.reps, args.threads});
    if (!args.csv.empty()) {
        std::ofstream out(args.csv);
        if (!out) {
            throw std::runtime_error("cannot write " + args.csv);
        }
        rw::mc::write_csv(out, rows);
    }
    rw::mc::write_summary(std::cout, rows);
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return !r.asserted || r.result.pass(); });
    return ok ? 0 : kValidationFailure;
}

rw::service::HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server != nullptr) {
        g_server->request_stop();
    }
}

int run_serve(const ServeArgs& args) {
    rw::service::ServiceModel model(std::filesystem::path(args.journal_dir));
    rw::service::ServerOptions options;
    options.host = args.host;
    options.port = args.port ? *args.port : rw::service::port_from_env();
    if (!args.static_dir.empty()) {
        options.static_dir = args.static_dir;
    }
    rw::service::HttpServer server(model, options);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.start();
    std::cerr << "regimewatch serving on http://" << options.host << ":" << server.port() << " (journal "
              << args.journal_dir << ", " << model.strategy_ids().size() << " strategies restored)\n";
    server.wait();
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hoeffding-bound regime-change monitor for trading strategies"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "regimewatch 0.1.0");

    BoundsArgs bounds_args;
    auto* bounds = app.add_subcommand("bounds", "One-off bound values for (mu, t, n, a, b)");
    bounds->add_option("--mu", bounds_args.mu, "Committed mean");
    bounds->add_option("--xbar", bounds_args.xbar, "Observed mean; the tolerance is the adverse gap to --mu");
    bounds->add_option("--t", bounds_args.t, "Tolerance in metric units")->check(CLI::NonNegativeNumber);
    bounds->add_option("--n", bounds_args.n, "Number of observations")->required();
    bounds->add_option("--a", bounds_args.a, "Lower bound of the metric");
    bounds->add_option("--b", bounds_args.b, "Upper bound of the metric");
    bounds->add_option("--direction", bounds_args.direction, "shortfall or excess")
        ->check(CLI::IsMember({"shortfall", "excess"}));
    bounds->add_flag("--json", bounds_args.json, "Emit JSON");

    MonitorArgs monitor_args;
    auto* monitor = app.add_subcommand("monitor", "Replay a trade log and print per-trade reports");
    monitor->add_option("--config", monitor_args.config, "Strategy config (default: $REGIMEWATCH_CONFIG)");
    monitor->add_option("--trades", monitor_args.trades, "Trade log, CSV or JSON lines")->required();
    monitor->add_flag("--json", monitor_args.json, "Emit JSON");

    WhatIfArgs whatif_args;
    auto* whatif = app.add_subcommand("whatif", "Reports for hypothetical outcomes or committed means");
    whatif->add_option("--config", whatif_args.config, "Strategy config (default: $REGIMEWATCH_CONFIG)");
    whatif->add_option("--trades", whatif_args.trades, "Trade log to replay first");
    whatif->add_option("--append", whatif_args.append, "METRIC=v1,v2,... outcomes to append")->take_all();
    whatif->add_option("--mu", whatif_args.mu, "METRIC=value alternative committed mean")->take_all();
    whatif->add_flag("--json", whatif_args.json, "Emit JSON");

    SimulateArgs simulate_args;
    auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo exceedance suite");
    simulate->add_option("--reps", simulate_args.reps, "Replications per grid point")
        ->check(CLI::Range(rw::mc::kMinReplications, std::int64_t{100'000'000}));
    simulate->add_option("--seed", simulate_args.seed, "Master seed");
    simulate->add_option("--threads", simulate_args.threads, "Worker threads (0 = hardware)");
    simulate->add_option("--csv", simulate_args.csv, "Write per-row results to this CSV file");

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "Start the JSON HTTP service");
    serve->add_option("--host", serve_args.host, "Bind address");
    serve->add_option("--port", serve_args.port, "Port (default: $REGIMEWATCH_PORT or 8417)")
        ->check(CLI::Range(0, 65535));
    serve->add_option("--journal-dir", serve_args.journal_dir, "Directory of strategy configs and journals");
    serve->add_option("--static", serve_args.static_dir, "Directory served under /");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bounds) return run_bounds(bounds_args);
        if (*monitor) return run_monitor(monitor_args);
        if (*whatif) return run_whatif(whatif_args);
        if (*simulate) return run_simulate(simulate_args);
        if (*serve) return run_serve(serve_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidationFailure;
    }
    return kValidationFailure;
}
