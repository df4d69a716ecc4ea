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

// Strategy configuration document:
//
//   {
//     "strategy_id": "win-rate",
//     "metrics": [
//       {"kind": "W", "mu": 0.6},
//       {"kind": "D", "mu": 0.1, "direction": "excess"},
//       {"kind": "M", "name": "roe", "rule": "return_on_equity",
//        "bounds": [-0.05, 0.05], "mu": 0.004, "direction": "shortfall"}
//     ],
//     "thresholds": [{"probability": 0.5, "tier": "Watch"}, ...],
//     "window": "since_inception" | {"rolling": 20},
//     "driving_bound": "exponential" | "tight",
//     "discount_rate": 0.0,
//     "seed": 42
//   }
//
// Only "metrics" is required. Unknown keys anywhere are rejected.

#include <fstream>
#include <initializer_list>

#include "regimewatch/io.hpp"

namespace regimewatch::io {

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (std::string_view a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            throw ConfigError(where + ": unknown field '" + key + "'");
        }
    }
}

double require_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) {
        throw ConfigError(where + ": missing '" + key + "'");
    }
    if (!j.at(key).is_number()) {
        throw ConfigError(where + ": '" + key + "' must be a number");
    }
    return j.at(key).get<double>();
}

std::string require_string(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) {
        throw ConfigError(where + ": missing '" + key + "'");
    }
    if (!j.at(key).is_string()) {
        throw ConfigError(where + ": '" + key + "' must be a string");
    }
    return j.at(key).get<std::string>();
}

template <class F>
auto as_config_error(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

TrackedMetric metric_from_json(const json& j, std::size_t index) {
    const std::string where = "metrics[" + std::to_string(index) + "]";
    reject_unknown(j, {"kind", "name", "mu", "direction", "bounds", "rule", "threshold"}, where);

    TrackedMetric m;
    m.spec.kind = as_config_error(where, [&] { return parse_metric_kind(require_string(j, "kind", where)); });
    m.spec.name = j.contains("name") ? require_string(j, "name", where) : std::string(to_string(m.spec.kind));
    m.committed_mu = require_number(j, "mu", where);

    if (j.contains("bounds")) {
        const json& b = j.at("bounds");
        if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
            throw ConfigError(where + ": 'bounds' must be [a, b]");
        }
        m.spec.bounds = as_config_error(where, [&] { return Bounds(b[0].get<double>(), b[1].get<double>()); });
    } else if (m.spec.kind == MetricKind::M) {
        throw ConfigError(where + ": M metrics must declare 'bounds'");
    }

    if (j.contains("rule")) {
        m.spec.rule = as_config_error(where, [&] { return parse_metric_rule(require_string(j, "rule", where)); });
    }
    if (j.contains("threshold")) {
        m.spec.threshold = require_number(j, "threshold", where);
    }

    if (j.contains("direction")) {
        m.direction =
            as_config_error(where, [&] { return parse_adverse_direction(require_string(j, "direction", where)); });
    } else {
        m.direction = as_config_error(where, [&] { return default_direction(m.spec.kind); });
    }
    as_config_error(where, [&] {
        m.spec.validate();
        return 0;
    });
    return m;
}

json metric_to_json(const TrackedMetric& m) {
    json j{{"kind", to_string(m.spec.kind)},
           {"name", m.spec.name},
           {"mu", m.committed_mu},
           {"direction", to_string(m.direction)}};
    if (m.spec.kind == MetricKind::M) {
        j["bounds"] = json::array({m.spec.bounds.lower(), m.spec.bounds.upper()});
    }
    if (m.spec.rule) {
        j["rule"] = to_string(*m.spec.rule);
        if (*m.spec.rule == MetricRule::UpsideThreshold || *m.spec.rule == MetricRule::LossThreshold) {
            j["threshold"] = m.spec.threshold;
        }
    }
    return j;
}

}  // namespace

StrategyConfig config_from_json(const json& j) {
    reject_unknown(j, {"strategy_id", "metrics", "thresholds", "window", "driving_bound", "discount_rate", "seed"},
                   "config");
    StrategyConfig config;
    if (j.contains("strategy_id")) {
        config.strategy_id = require_string(j, "strategy_id", "config");
    }

    if (!j.contains("metrics") || !j.at("metrics").is_array()) {
        throw ConfigError("config: 'metrics' must be an array");
    }
    std::size_t index = 0;
    for (const json& m : j.at("metrics")) {
        config.metrics.push_back(metric_from_json(m, index++));
    }

    if (j.contains("thresholds")) {
        const json& th = j.at("thresholds");
        if (!th.is_array()) {
            throw ConfigError("config: 'thresholds' must be an array");
        }
        config.thresholds.clear();
        std::size_t k = 0;
        for (const json& t : th) {
            const std::string where = "thresholds[" + std::to_string(k++) + "]";
            reject_unknown(t, {"probability", "tier"}, where);
            Threshold threshold{};
            threshold.probability = require_number(t, "probability", where);
            threshold.tier = as_config_error(where, [&] { return parse_signal_tier(require_string(t, "tier", where)); });
            config.thresholds.push_back(threshold);
        }
    }

    if (j.contains("window")) {
        const json& w = j.at("window");
        if (w.is_string() && w.get<std::string>() == "since_inception") {
            config.window = WindowPolicy::since_inception();
        } else if (w.is_object()) {
            reject_unknown(w, {"rolling"}, "window");
            if (!w.contains("rolling") || !w.at("rolling").is_number_unsigned() || w.at("rolling").get<std::size_t>() == 0) {
                throw ConfigError("window: 'rolling' must be a positive integer");
            }
            config.window = WindowPolicy::rolling(w.at("rolling").get<std::size_t>());
        } else {
            throw ConfigError("window must be \"since_inception\" or {\"rolling\": N}");
        }
    }

    if (j.contains("driving_bound")) {
        config.driving_bound = as_config_error(
            "config", [&] { return parse_driving_bound(require_string(j, "driving_bound", "config")); });
    }
    if (j.contains("discount_rate")) {
        config.discount_rate = require_number(j, "discount_rate", "config");
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) {
            throw ConfigError("config: 'seed' must be a non-negative integer");
        }
        config.seed = j.at("seed").get<std::uint64_t>();
    }

    // Everything except a missing id is checked here; callers may still assign one.
    StrategyConfig probe = config;
    if (probe.strategy_id.empty()) {
        probe.strategy_id = "unassigned";
    }
    as_config_error("config", [&] {
        probe.validate();
        return 0;
    });
    return config;
}

json config_to_json(const StrategyConfig& config) {
    json metrics = json::array();
    for (const TrackedMetric& m : config.metrics) {
        metrics.push_back(metric_to_json(m));
    }
    json thresholds = json::array();
    for (const Threshold& t : config.thresholds) {
        thresholds.push_back({{"probability", t.probability}, {"tier", to_string(t.tier)}});
    }
    json j{{"strategy_id", config.strategy_id},
           {"metrics", metrics},
           {"thresholds", thresholds},
           {"driving_bound", to_string(config.driving_bound)},
           {"discount_rate", config.discount_rate},
           {"seed", config.seed}};
    if (config.window.rolling_length) {
        j["window"] = {{"rolling", *config.window.rolling_length}};
    } else {
        j["window"] = "since_inception";
    }
    return j;
}

StrategyConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    StrategyConfig config = config_from_json(j);
    if (config.strategy_id.empty()) {
        config.strategy_id = path.stem().string();
    }
    return config;
}

}  // namespace regimewatch::io
