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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "regimewatch/io.hpp"

namespace regimewatch::io {

namespace {

int read_digits(std::string_view text, std::size_t pos, std::size_t count) {
    if (pos + count > text.size()) {
        throw std::invalid_argument("timestamp '" + std::string(text) + "' is truncated");
    }
    int value = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') {
            throw std::invalid_argument("timestamp '" + std::string(text) + "' has a non-digit at offset " +
                                        std::to_string(i));
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
    if (pos >= text.size() || text[pos] != c) {
        throw std::invalid_argument("timestamp '" + std::string(text) + "' expected '" + std::string(1, c) +
                                    "' at offset " + std::to_string(pos));
    }
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    // YYYY-MM-DDTHH:MM:SS[.fff...](Z|+00:00)
    const int y = read_digits(text, 0, 4);
    expect(text, 4, '-');
    const int mo = read_digits(text, 5, 2);
    expect(text, 7, '-');
    const int d = read_digits(text, 8, 2);
    expect(text, 10, 'T');
    const int hh = read_digits(text, 11, 2);
    expect(text, 13, ':');
    const int mm = read_digits(text, 14, 2);
    expect(text, 16, ':');
    const int ss = read_digits(text, 17, 2);

    std::size_t pos = 19;
    int millis = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            if (pos - start < 3) {
                millis = millis * 10 + (text[pos] - '0');
            } else if (text[pos] != '0') {
                throw std::invalid_argument("timestamp '" + std::string(text) + "' is finer than milliseconds");
            }
            ++pos;
        }
        if (pos == start) {
            throw std::invalid_argument("timestamp '" + std::string(text) + "' has an empty fraction");
        }
        for (std::size_t k = pos - start; k < 3; ++k) {
            millis *= 10;
        }
    }
    const std::string_view zone = text.substr(pos);
    if (zone != "Z" && zone != "+00:00") {
        throw std::invalid_argument("timestamp '" + std::string(text) + "' must be UTC (suffix Z or +00:00)");
    }

    const year_month_day date{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!date.ok() || hh > 23 || mm > 59 || ss > 59) {
        throw std::invalid_argument("timestamp '" + std::string(text) + "' is not a valid date and time");
    }
    return Timestamp{sys_days{date}.time_since_epoch() + hours{hh} + minutes{mm} + seconds{ss} +
                     milliseconds{millis}};
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const auto day_point = floor<days>(ts);
    const year_month_day date{day_point};
    auto rest = ts - day_point;
    const auto h = duration_cast<hours>(rest);
    rest -= h;
    const auto m = duration_cast<minutes>(rest);
    rest -= m;
    const auto s = duration_cast<seconds>(rest);
    rest -= s;
    const auto ms = rest.count();

    char buf[40];
    if (ms == 0) {
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02lldZ", static_cast<int>(date.year()),
                      static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                      static_cast<int>(h.count()), static_cast<int>(m.count()), static_cast<long long>(s.count()));
    } else {
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02lld.%03lldZ", static_cast<int>(date.year()),
                      static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                      static_cast<int>(h.count()), static_cast<int>(m.count()), static_cast<long long>(s.count()),
                      static_cast<long long>(ms));
    }
    return buf;
}

double parse_decimal(std::string_view text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(begin, end, value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(value)) {
        throw std::invalid_argument("'" + std::string(text) + "' is not a decimal number");
    }
    return value;
}

std::string format_decimal(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace regimewatch::io
