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

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <doctest.h>
#include <httplib.h>

#include "regimewatch/io.hpp"
#include "regimewatch/service.hpp"
#include "trade_gen.hpp"

using namespace regimewatch;
using regimewatch::io::json;
using regimewatch::service::ServiceModel;

namespace {

const std::filesystem::path kFixtures = REGIMEWATCH_FIXTURES;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("regimewatch-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

json body_of(const service::Response& r) { return json::parse(r.body); }

void post_all(ServiceModel& m, const std::string& id, const std::vector<TradeRecord>& trades) {
    for (const auto& t : trades) {
        const auto r = m.handle("POST", "/strategies/" + id + "/trades", io::trade_to_json(t).dump());
        REQUIRE_MESSAGE(r.status == 200, r.body);
    }
}

}  // namespace

TEST_CASE("routes and status codes") {
    ServiceModel m;
    CHECK(m.handle("GET", "/healthz").status == 200);
    CHECK(m.handle("GET", "/nowhere").status == 404);
    CHECK(m.handle("GET", "/strategies/ghost/report").status == 404);

    CHECK(m.handle("POST", "/strategies", "{oops").status == 400);
    CHECK(m.handle("POST", "/strategies", R"({"metrics": [{"kind": "W"}]})").status == 422);
    CHECK(m.handle("POST", "/strategies", R"({"strategy_id": "a b", "metrics": [{"kind": "W", "mu": 0.6}]})").status ==
          422);

    const auto created = m.handle("POST", "/strategies", slurp(kFixtures / "win_rate_config.json"));
    REQUIRE(created.status == 201);
    CHECK(body_of(created)["strategy_id"] == "win-rate");
    CHECK(m.handle("POST", "/strategies", slurp(kFixtures / "win_rate_config.json")).status == 409);

    const auto anon = m.handle("POST", "/strategies", R"({"metrics": [{"kind": "W", "mu": 0.6}]})");
    REQUIRE(anon.status == 201);
    const std::string anon_id = body_of(anon)["strategy_id"];
    CHECK(anon_id.rfind("strategy-", 0) == 0);

    const auto list = body_of(m.handle("GET", "/strategies"));
    CHECK(list["strategies"].size() == 2);
    CHECK(io::config_from_json(body_of(m.handle("GET", "/strategies/win-rate"))).metrics.size() == 1);

    const auto empty = m.handle("GET", "/strategies/win-rate/report");
    CHECK(empty.status == 200);
    CHECK(body_of(empty)["status"] == "no completed trades");
    CHECK(m.handle("GET", "/strategies/win-rate/curve").status == 422);

    const auto trade = testgen::make_trade("x1", Side::Long, 100, 101);
    const std::string tj = io::trade_to_json(trade).dump();
    CHECK(m.handle("POST", "/strategies/win-rate/trades", "[").status == 400);
    CHECK(m.handle("POST", "/strategies/win-rate/trades", R"({"trade_id": "x"})").status == 422);
    CHECK(m.handle("POST", "/strategies/win-rate/trades", tj).status == 200);
    CHECK(m.handle("POST", "/strategies/win-rate/trades", tj).status == 409);
    CHECK(m.handle("POST", "/strategies/ghost/trades", tj).status == 404);

    CHECK(m.handle("POST", "/strategies/win-rate/whatif", R"({"mu": {"Z": 0.1}})").status == 422);
    CHECK(m.handle("POST", "/strategies/win-rate/whatif", "").status == 200);

    const auto curve = m.handle("GET", "/strategies/win-rate/curve?metric=W&t=0.1&max_n=50");
    REQUIRE(curve.status == 200);
    const json c = body_of(curve);
    CHECK(c["n"].size() == 50);
    CHECK(c["p_exp"].size() == 50);
    CHECK(c["p_tight"].size() == 50);
    CHECK(m.handle("GET", "/strategies/win-rate/curve?metric=Q&t=0.1").status == 422);
    CHECK(m.handle("GET", "/strategies/win-rate/curve?t=0.1&max_n=0").status == 422);
}

TEST_CASE("twelve-trade scenario through the service") {
    ServiceModel m;
    REQUIRE(m.handle("POST", "/strategies", slurp(kFixtures / "win_rate_config.json")).status == 201);
    post_all(m, "win-rate", io::parse_trades(kFixtures / "twelve_trades.csv"));

    const json report = body_of(m.handle("GET", "/strategies/win-rate/report"));
    CHECK(report["trades"] == 12);
    CHECK(report["overall_tier"] == "Watch");
    const json& w = report["reports"][0];
    CHECK(w["n"] == 12);
    CHECK(w["p_exp"].get<double>() == doctest::Approx(0.44634340062571279).epsilon(1e-12));

    const auto before = m.handle("GET", "/strategies/win-rate/report").body;
    const auto scratch = m.handle("POST", "/strategies/win-rate/whatif", R"({"append": {"W": [0, 0, 0]}})");
    REQUIRE(scratch.status == 200);
    const json s = body_of(scratch);
    CHECK(s["overall_tier"] == "SignificantRisk");
    CHECK(s["reports"][0]["n"] == 15);
    CHECK(m.handle("GET", "/strategies/win-rate/report").body == before);
}

TEST_CASE("service reports equal a direct replay") {
    std::mt19937_64 gen(21);
    const StrategyConfig config = io::load_config(kFixtures / "multi_config.json");
    auto cfg_no_m = config;
    cfg_no_m.metrics.pop_back();  // random trades can leave the +-5% band
    ServiceModel m;
    REQUIRE(m.handle("POST", "/strategies", io::config_to_json(cfg_no_m).dump()).status == 201);
    const auto trades = testgen::random_journal(gen, 30);
    post_all(m, "multi", trades);

    const Monitor direct = Monitor::replay(cfg_no_m, trades);
    const json body = body_of(m.handle("GET", "/strategies/multi/report"));
    REQUIRE(body["reports"].size() == direct.latest().size());
    for (std::size_t k = 0; k < direct.latest().size(); ++k) {
        CHECK(io::report_from_json(body["reports"][k]) == direct.latest()[k]);
    }
    CHECK(m.snapshot("multi")->latest() == direct.latest());
    CHECK(m.snapshot("ghost") == nullptr);
}

TEST_CASE("restart from the journal directory") {
    TempDir dir;
    std::mt19937_64 gen(5);
    const auto trades = testgen::random_journal(gen, 20);
    std::string report_before;
    {
        ServiceModel m(dir.path);
        REQUIRE(m.handle("POST", "/strategies", slurp(kFixtures / "win_rate_config.json")).status == 201);
        REQUIRE(m.handle("POST", "/strategies", R"({"metrics": [{"kind": "D", "mu": 0.3}]})").status == 201);
        post_all(m, "win-rate", trades);
        post_all(m, "strategy-1", {trades.begin(), trades.begin() + 7});
        report_before = m.handle("GET", "/strategies/win-rate/report").body;
    }
    CHECK(std::filesystem::exists(dir.path / "win-rate.config.json"));
    CHECK(std::filesystem::exists(dir.path / "win-rate.jsonl"));

    ServiceModel again(dir.path);
    CHECK(again.strategy_ids() == std::vector<std::string>{"strategy-1", "win-rate"});
    CHECK(again.handle("GET", "/strategies/win-rate/report").body == report_before);
    CHECK(body_of(again.handle("GET", "/strategies/strategy-1/report"))["trades"] == 7);
    // Fresh ids do not collide with restored ones.
    const auto next = again.handle("POST", "/strategies", R"({"metrics": [{"kind": "W", "mu": 0.5}]})");
    REQUIRE(next.status == 201);
    CHECK(body_of(next)["strategy_id"] != "strategy-1");
}

TEST_CASE("concurrent posts stay consistent") {
    ServiceModel m;
    constexpr int kStrategies = 4;
    constexpr int kTrades = 40;
    for (int s = 0; s < kStrategies; ++s) {
        const std::string cfg = R"({"strategy_id": "s)" + std::to_string(s) +
                                R"(", "metrics": [{"kind": "W", "mu": 0.55}, {"kind": "D", "mu": 0.3}]})";
        REQUIRE(m.handle("POST", "/strategies", cfg).status == 201);
    }
    std::vector<std::vector<TradeRecord>> journals;
    std::mt19937_64 gen(77);
    for (int s = 0; s < kStrategies; ++s) journals.push_back(testgen::random_journal(gen, kTrades));

    std::vector<std::thread> workers;
    std::atomic<int> failures{0};
    for (int s = 0; s < kStrategies; ++s) {
        workers.emplace_back([&, s] {
            for (const auto& t : journals[s]) {
                if (m.handle("POST", "/strategies/s" + std::to_string(s) + "/trades", io::trade_to_json(t).dump())
                        .status != 200) {
                    ++failures;
                }
                (void)m.handle("GET", "/strategies/s" + std::to_string((s + 1) % kStrategies) + "/report");
            }
        });
    }
    for (auto& w : workers) w.join();
    CHECK(failures == 0);
    for (int s = 0; s < kStrategies; ++s) {
        const auto snap = m.snapshot("s" + std::to_string(s));
        REQUIRE(snap);
        CHECK(snap->journal().size() == kTrades);
        CHECK(snap->latest() == Monitor::replay(snap->config(), journals[s]).latest());
    }
}

TEST_CASE("real HTTP round trip") {
    ServiceModel m;
    service::HttpServer server(m, {"127.0.0.1", 0, std::nullopt});
    server.start();
    REQUIRE(server.port() > 0);

    httplib::Client client("127.0.0.1", server.port());
    auto health = client.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);

    auto created = client.Post("/strategies", slurp(kFixtures / "win_rate_config.json"), "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    for (const auto& t : io::parse_trades(kFixtures / "twelve_trades.csv")) {
        auto r = client.Post("/strategies/win-rate/trades", io::trade_to_json(t).dump(), "application/json");
        REQUIRE(r);
        CHECK(r->status == 200);
    }
    auto report = client.Get("/strategies/win-rate/report");
    REQUIRE(report);
    CHECK(json::parse(report->body)["overall_tier"] == "Watch");
    auto curve = client.Get("/strategies/win-rate/curve?metric=W&max_n=24");
    REQUIRE(curve);
    CHECK(curve->status == 200);
    CHECK(json::parse(curve->body)["n"].size() == 24);
    auto missing = client.Get("/strategies/none/report");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    server.stop();
}

TEST_CASE("port from the environment") {
    ::setenv("REGIMEWATCH_PORT", "9123", 1);
    CHECK(service::port_from_env() == 9123);
    ::setenv("REGIMEWATCH_PORT", "junk", 1);
    CHECK_THROWS_AS(service::port_from_env(1234), std::invalid_argument);
    ::unsetenv("REGIMEWATCH_PORT");
    CHECK(service::port_from_env() == service::kDefaultPort);
}
