#pragma once

#include <charconv>
#include <cstdio>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace crossimpact {

using Date = std::chrono::year_month_day;

/// Seconds since local midnight.
using SecondOfDay = std::int32_t;

namespace detail {

inline std::optional<int> parse_digits(std::string_view s) {
    if (s.empty()) return std::nullopt;
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

}  // namespace detail

/// Accepts `YYYY-MM-DD` or `YYYYMMDD`.
inline std::optional<Date> parse_date(std::string_view s) {
    std::optional<int> y, m, d;
    if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
        y = detail::parse_digits(s.substr(0, 4));
        m = detail::parse_digits(s.substr(5, 2));
        d = detail::parse_digits(s.substr(8, 2));
    } else if (s.size() == 8) {
        y = detail::parse_digits(s.substr(0, 4));
        m = detail::parse_digits(s.substr(4, 2));
        d = detail::parse_digits(s.substr(6, 2));
    }
    if (!y || !m || !d) return std::nullopt;
    Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
              std::chrono::day{static_cast<unsigned>(*d)}};
    if (!date.ok()) return std::nullopt;
    return date;
}

inline std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

/// Accepts `HH:MM:SS`.
inline std::optional<SecondOfDay> parse_time(std::string_view s) {
    if (s.size() != 8 || s[2] != ':' || s[5] != ':') return std::nullopt;
    auto h = detail::parse_digits(s.substr(0, 2));
    auto m = detail::parse_digits(s.substr(3, 2));
    auto sec = detail::parse_digits(s.substr(6, 2));
    if (!h || !m || !sec || *h > 23 || *m > 59 || *sec > 59) return std::nullopt;
    return *h * 3600 + *m * 60 + *sec;
}

inline std::string format_time(SecondOfDay second) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", second / 3600, (second / 60) % 60,
                  second % 60);
    return buf;
}

/// Day index counted from 1970-01-01, handy for arithmetic on synthetic calendars.
inline Date date_from_days(int days_since_epoch) {
    return Date{std::chrono::sys_days{std::chrono::days{days_since_epoch}}};
}

}  // namespace crossimpact
