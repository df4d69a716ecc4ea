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

#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>

#include "regimewatch/io.hpp"

namespace regimewatch::io {

namespace {

constexpr std::array<std::string_view, 9> kColumns = {
    "trade_id", "entry_time",        "exit_time",  "side", "entry_price", "exit_price",
    "quantity", "transaction_costs", "exit_reason"};

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"' && current.empty() && !was_quoted) {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
            was_quoted = false;
        } else {
            current.push_back(c);
        }
    }
    if (quoted) {
        throw ParseError(line_no, std::string(kColumns[std::min(fields.size(), kColumns.size() - 1)]), "unterminated quote");
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string quote_csv(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

template <class F>
auto field_or_throw(std::size_t line_no, std::string_view field, F&& parse) {
    try {
        return parse();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(line_no, std::string(field), e.what());
    }
}

void check_record(const TradeRecord& rec, std::size_t line_no, std::unordered_set<std::string>& seen) {
    try {
        rec.validate();
    } catch (const InvalidTrade& e) {
        throw ParseError(line_no, e.field(), e.what());
    }
    if (!seen.insert(rec.trade_id).second) {
        throw ParseError(line_no, "trade_id", "duplicate trade_id '" + rec.trade_id + "'");
    }
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t") == std::string::npos;
}

}  // namespace

ParseError::ParseError(std::size_t line, std::string field, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", field " + field + ": " + message),
      line_(line),
      field_(std::move(field)) {}

TradeFormat detect_format(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") {
        return TradeFormat::JsonLines;
    }
    return TradeFormat::Csv;
}

std::vector<TradeRecord> parse_trades(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open trade log " + path.string());
    }
    return parse_trades(in, detect_format(path));
}

std::vector<TradeRecord> parse_trades(std::istream& in, TradeFormat format) {
    return format == TradeFormat::Csv ? parse_trades_csv(in) : parse_trades_jsonl(in);
}

std::vector<TradeRecord> parse_trades_csv(std::istream& in) {
    std::vector<TradeRecord> out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (blank(line)) {
            continue;
        }
        auto fields = split_csv(line, line_no);
        if (!have_header) {
            if (fields.size() != kColumns.size()) {
                throw ParseError(line_no, "header", "expected " + std::to_string(kColumns.size()) + " columns");
            }
            for (std::size_t i = 0; i < kColumns.size(); ++i) {
                if (fields[i] != kColumns[i]) {
                    throw ParseError(line_no, "header",
                                     "column " + std::to_string(i + 1) + " must be '" + std::string(kColumns[i]) +
                                         "', got '" + fields[i] + "'");
                }
            }
            have_header = true;
            continue;
        }
        if (fields.size() != kColumns.size()) {
            throw ParseError(line_no, fields.size() < kColumns.size() ? std::string(kColumns[fields.size()]) : "row",
                             "expected " + std::to_string(kColumns.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        }
        TradeRecord rec;
        rec.trade_id = fields[0];
        rec.entry_time = field_or_throw(line_no, kColumns[1], [&] { return parse_timestamp(fields[1]); });
        rec.exit_time = field_or_throw(line_no, kColumns[2], [&] { return parse_timestamp(fields[2]); });
        rec.side = field_or_throw(line_no, kColumns[3], [&] { return parse_side(fields[3]); });
        rec.entry_price = field_or_throw(line_no, kColumns[4], [&] { return parse_decimal(fields[4]); });
        rec.exit_price = field_or_throw(line_no, kColumns[5], [&] { return parse_decimal(fields[5]); });
        rec.quantity = field_or_throw(line_no, kColumns[6], [&] { return parse_decimal(fields[6]); });
        rec.transaction_costs = field_or_throw(line_no, kColumns[7], [&] { return parse_decimal(fields[7]); });
        rec.exit_reason = field_or_throw(line_no, kColumns[8], [&] { return parse_exit_reason(fields[8]); });
        check_record(rec, line_no, seen);
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<TradeRecord> parse_trades_jsonl(std::istream& in) {
    std::vector<TradeRecord> out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (blank(line)) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, "record", e.what());
        }
        TradeRecord rec;
        try {
            rec = trade_from_json(j);
        } catch (const InvalidTrade& e) {
            throw ParseError(line_no, e.field(), e.what());
        }
        check_record(rec, line_no, seen);
        out.push_back(std::move(rec));
    }
    return out;
}

void write_trades_csv(std::ostream& out, std::span<const TradeRecord> trades) {
    for (std::size_t i = 0; i < kColumns.size(); ++i) {
        out << (i ? "," : "") << kColumns[i];
    }
    out << '\n';
    for (const TradeRecord& t : trades) {
        out << quote_csv(t.trade_id) << ',' << format_timestamp(t.entry_time) << ',' << format_timestamp(t.exit_time)
            << ',' << to_string(t.side) << ',' << format_decimal(t.entry_price) << ','
            << format_decimal(t.exit_price) << ',' << format_decimal(t.quantity) << ','
            << format_decimal(t.transaction_costs) << ',' << to_string(t.exit_reason) << '\n';
    }
}

void write_trades_jsonl(std::ostream& out, std::span<const TradeRecord> trades) {
    for (const TradeRecord& t : trades) {
        out << trade_to_json(t).dump() << '\n';
    }
}

json trade_to_json(const TradeRecord& t) {
    return json{{"trade_id", t.trade_id},
                {"entry_time", format_timestamp(t.entry_time)},
                {"exit_time", format_timestamp(t.exit_time)},
                {"side", to_string(t.side)},
                {"entry_price", t.entry_price},
                {"exit_price", t.exit_price},
                {"quantity", t.quantity},
                {"transaction_costs", t.transaction_costs},
                {"exit_reason", to_string(t.exit_reason)}};
}

TradeRecord trade_from_json(const json& j) {
    if (!j.is_object()) {
        throw InvalidTrade("record", "trade must be a JSON object");
    }
    const std::set<std::string_view> known(kColumns.begin(), kColumns.end());
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw InvalidTrade(key, "unknown trade field '" + key + "'");
        }
    }
    auto get = [&](std::string_view key) -> const json& {
        const auto it = j.find(std::string(key));
        if (it == j.end()) {
            throw InvalidTrade(std::string(key), "missing trade field '" + std::string(key) + "'");
        }
        return *it;
    };
    auto text = [&](std::string_view key) {
        const json& v = get(key);
        if (!v.is_string()) {
            throw InvalidTrade(std::string(key), std::string(key) + " must be a string");
        }
        return v.get<std::string>();
    };
    auto number = [&](std::string_view key) {
        const json& v = get(key);
        if (v.is_number()) {
            return v.get<double>();
        }
        if (v.is_string()) {
            try {
                return parse_decimal(v.get<std::string>());
            } catch (const std::exception& e) {
                throw InvalidTrade(std::string(key), e.what());
            }
        }
        throw InvalidTrade(std::string(key), std::string(key) + " must be a number or decimal string");
    };
    auto wrap = [](std::string_view key, auto&& f) {
        try {
            return f();
        } catch (const InvalidTrade&) {
            throw;
        } catch (const std::exception& e) {
            throw InvalidTrade(std::string(key), e.what());
        }
    };

    TradeRecord rec;
    rec.trade_id = text("trade_id");
    rec.entry_time = wrap("entry_time", [&] { return parse_timestamp(text("entry_time")); });
    rec.exit_time = wrap("exit_time", [&] { return parse_timestamp(text("exit_time")); });
    rec.side = wrap("side", [&] { return parse_side(text("side")); });
    rec.entry_price = number("entry_price");
    rec.exit_price = number("exit_price");
    rec.quantity = number("quantity");
    rec.transaction_costs = number("transaction_costs");
    rec.exit_reason = wrap("exit_reason", [&] { return parse_exit_reason(text("exit_reason")); });
    return rec;
}

}  // namespace regimewatch::io
