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

#include "regimewatch/io.hpp"

namespace regimewatch::io {

json report_to_json(const BoundReport& r) {
    return json{{"metric", r.metric},
                {"kind", to_string(r.kind)},
                {"n", r.n},
                {"observed_mean", r.observed_mean},
                {"committed_mu", r.committed_mu},
                {"direction", to_string(r.direction)},
                {"bounds", json::array({r.lower, r.upper})},
                {"tolerance_t", r.tolerance_t},
                {"p_exp", r.p_exp.value()},
                {"p_tight", r.p_tight.value()},
                {"tier", to_string(r.tier)},
                {"timestamp", format_timestamp(r.timestamp)}};
}

BoundReport report_from_json(const json& j) {
    BoundReport r;
    r.metric = j.at("metric").get<std::string>();
    r.kind = parse_metric_kind(j.at("kind").get<std::string>());
    r.n = j.at("n").get<std::int64_t>();
    r.observed_mean = j.at("observed_mean").get<double>();
    r.committed_mu = j.at("committed_mu").get<double>();
    r.direction = parse_adverse_direction(j.at("direction").get<std::string>());
    r.lower = j.at("bounds").at(0).get<double>();
    r.upper = j.at("bounds").at(1).get<double>();
    r.tolerance_t = j.at("tolerance_t").get<double>();
    r.p_exp = BoundValue(j.at("p_exp").get<double>());
    r.p_tight = BoundValue(j.at("p_tight").get<double>());
    r.tier = parse_signal_tier(j.at("tier").get<std::string>());
    r.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
    return r;
}

json reports_to_json(std::span<const BoundReport> reports) {
    json arr = json::array();
    for (const BoundReport& r : reports) {
        arr.push_back(report_to_json(r));
    }
    return arr;
}

WhatIf whatif_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("what-if body must be a JSON object");
    }
    WhatIf w;
    for (const auto& [key, value] : j.items()) {
        if (key == "append") {
            if (!value.is_object()) {
                throw ConfigError("what-if 'append' must map metric names to arrays of outcomes");
            }
            for (const auto& [metric, outcomes] : value.items()) {
                if (!outcomes.is_array()) {
                    throw ConfigError("what-if 'append." + metric + "' must be an array");
                }
                auto& dest = w.appended[metric];
                for (const json& o : outcomes) {
                    if (!o.is_number()) {
                        throw ConfigError("what-if 'append." + metric + "' must contain numbers");
                    }
                    dest.push_back(o.get<double>());
                }
            }
        } else if (key == "mu") {
            if (!value.is_object()) {
                throw ConfigError("what-if 'mu' must map metric names to numbers");
            }
            for (const auto& [metric, mu] : value.items()) {
                if (!mu.is_number()) {
                    throw ConfigError("what-if 'mu." + metric + "' must be a number");
                }
                w.alternative_mu[metric] = mu.get<double>();
            }
        } else {
            throw ConfigError("what-if: unknown field '" + key + "'");
        }
    }
    return w;
}

json whatif_to_json(const WhatIf& w) {
    json j = json::object();
    if (!w.appended.empty()) {
        j["append"] = w.appended;
    }
    if (!w.alternative_mu.empty()) {
        j["mu"] = w.alternative_mu;
    }
    return j;
}

}  // namespace regimewatch::io
