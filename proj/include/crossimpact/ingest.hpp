#pragma once

// Trades/quotes file parsing, the intraday one-second grid, and common
// trading-day bookkeeping.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crossimpact/calendar.hpp"
#include "crossimpact/errors.hpp"

namespace crossimpact {

struct TradeEvent {
    SecondOfDay second_of_day = 0;
    int seq_in_second = 1;
    double price = 0.0;
    std::int64_t volume = 0;

    friend bool operator==(const TradeEvent&, const TradeEvent&) = default;
};

struct QuoteEvent {
    SecondOfDay second_of_day = 0;
    int seq_in_second = 1;
    double bid = 0.0;
    double ask = 0.0;

    double midpoint() const { return 0.5 * (bid + ask); }

    friend bool operator==(const QuoteEvent&, const QuoteEvent&) = default;
};

/// One stock's raw events for one calendar day, sorted by (second, seq).
struct TickDay {
    std::string symbol;
    Date date;
    std::vector<TradeEvent> trades;
    std::vector<QuoteEvent> quotes;

    /// A day counts as a trading day when at least one trade was recorded.
    bool is_trading_day() const { return !trades.empty(); }

    friend bool operator==(const TickDay&, const TickDay&) = default;
};

/// Half-open window [open_second, close_second) mapped onto slots 0..slots()-1.
struct IntradayGrid {
    SecondOfDay open_second = 9 * 3600 + 40 * 60;   // 9:40
    SecondOfDay close_second = 15 * 3600 + 50 * 60; // 15:50

    int slots() const { return close_second - open_second; }
    bool contains(SecondOfDay s) const { return s >= open_second && s < close_second; }
    int slot_of(SecondOfDay s) const { return s - open_second; }

    void validate() const {
        if (slots() <= 0) throw UsageError("intraday grid must have close_second > open_second");
    }

    friend bool operator==(const IntradayGrid&, const IntradayGrid&) = default;
};

/// Exchange session used to validate rows; both ends inclusive.
struct Session {
    SecondOfDay open_second = 9 * 3600 + 30 * 60;
    SecondOfDay close_second = 16 * 3600;

    bool contains(SecondOfDay s) const { return s >= open_second && s <= close_second; }

    friend bool operator==(const Session&, const Session&) = default;
};

enum class TickKind { trades, quotes };

/// Describes the delimited text layout of trades and quotes files.
struct SchemaDescriptor {
    char delimiter = ',';
    bool header = true;
    std::vector<std::string> trade_columns{"date", "time", "price", "volume"};
    std::vector<std::string> quote_columns{"date", "time", "bid", "ask"};
    /// File column of each semantic field (date, time, value1, value2). Used
    /// for headerless files and when writing; a header overrides it on read.
    std::vector<std::size_t> positions{0, 1, 2, 3};
    Session session;

    const std::vector<std::string>& columns(TickKind kind) const {
        return kind == TickKind::trades ? trade_columns : quote_columns;
    }

    friend bool operator==(const SchemaDescriptor&, const SchemaDescriptor&) = default;
};

struct ParseReport {
    std::size_t rows_read = 0;
    std::size_t rows_accepted = 0;
    std::size_t malformed = 0;
    std::size_t crossed_quotes = 0;
    std::size_t non_monotone = 0;
    std::size_t outside_session = 0;

    std::size_t rejected_rows() const {
        return malformed + crossed_quotes + non_monotone + outside_session;
    }
};

struct ParseResult {
    std::vector<TickDay> days;
    ParseReport report;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        auto field = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
            field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t'))
            field.remove_suffix(1);
        out.push_back(field);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Shortest text that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct DayBuilder {
    TickDay day;
    SecondOfDay last_second = -1;
};

}  // namespace detail

/// Parses one trades or quotes file into per-date TickDays. Rows that violate
/// an event invariant are dropped and counted in the report; a header that
/// does not name the required columns is fatal.
inline ParseResult parse_tick_file(std::istream& in, const SchemaDescriptor& schema,
                                   TickKind kind, const std::string& symbol = {}) {
    const auto& expected = schema.columns(kind);
    const std::size_t n_required = 4;
    if (expected.size() != n_required)
        throw UsageError("schema must name exactly four columns");

    // Position of date, time, value1, value2 within a row.
    if (schema.positions.size() != n_required)
        throw UsageError("schema positions must list four column indices");
    std::vector<std::size_t> position = schema.positions;
    std::size_t n_fields = *std::max_element(position.begin(), position.end()) + 1;

    ParseResult result;
    std::map<Date, detail::DayBuilder> days;
    std::string line;
    bool header_pending = schema.header;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_fields(line, schema.delimiter);

        if (header_pending) {
            header_pending = false;
            n_fields = fields.size();
            for (std::size_t k = 0; k < n_required; ++k) {
                auto want = detail::to_lower(expected[k]);
                auto it = std::find_if(fields.begin(), fields.end(), [&](std::string_view f) {
                    return detail::to_lower(f) == want;
                });
                if (it == fields.end())
                    throw DataError("unparseable header: missing column '" + expected[k] +
                                    "' in line: " + line);
                position[k] = static_cast<std::size_t>(it - fields.begin());
            }
            continue;
        }

        ++result.report.rows_read;
        if (fields.size() < n_fields) {
            ++result.report.malformed;
            continue;
        }
        auto date = parse_date(fields[position[0]]);
        auto second = parse_time(fields[position[1]]);
        auto a = detail::parse_double(fields[position[2]]);
        if (!date || !second || !a) {
            ++result.report.malformed;
            continue;
        }
        if (!schema.session.contains(*second)) {
            ++result.report.outside_session;
            continue;
        }

        auto& builder = days[*date];
        if (kind == TickKind::trades) {
            auto volume = detail::parse_int(fields[position[3]]);
            if (!volume || !(*a > 0.0) || *volume <= 0) {
                ++result.report.malformed;
                continue;
            }
            if (*second < builder.last_second) {
                ++result.report.non_monotone;
                continue;
            }
            int seq = 1;
            if (!builder.day.trades.empty() && builder.day.trades.back().second_of_day == *second)
                seq = builder.day.trades.back().seq_in_second + 1;
            builder.day.trades.push_back({*second, seq, *a, *volume});
        } else {
            auto b = detail::parse_double(fields[position[3]]);
            if (!b || !(*a > 0.0) || !(*b > 0.0)) {
                ++result.report.malformed;
                continue;
            }
            if (*b < *a) {
                ++result.report.crossed_quotes;
                continue;
            }
            if (*second < builder.last_second) {
                ++result.report.non_monotone;
                continue;
            }
            int seq = 1;
            if (!builder.day.quotes.empty() && builder.day.quotes.back().second_of_day == *second)
                seq = builder.day.quotes.back().seq_in_second + 1;
            builder.day.quotes.push_back({*second, seq, *a, *b});
        }
        builder.last_second = *second;
        ++result.report.rows_accepted;
    }

    for (auto& [date, builder] : days) {
        if (builder.day.trades.empty() && builder.day.quotes.empty()) continue;
        builder.day.symbol = symbol;
        builder.day.date = date;
        result.days.push_back(std::move(builder.day));
    }
    return result;
}

/// Writes days in the layout described by `schema`; the output parses back to
/// identical TickDay values.
inline void write_tick_file(std::ostream& out, std::span<const TickDay> days,
                            const SchemaDescriptor& schema, TickKind kind) {
    const auto& cols = schema.columns(kind);
    const char d = schema.delimiter;
    const std::size_t width = *std::max_element(schema.positions.begin(), schema.positions.end()) + 1;
    std::vector<std::string> row(width);
    auto flush = [&] {
        for (std::size_t k = 0; k < width; ++k) {
            if (k) out << d;
            out << row[k];
        }
        out << '\n';
    };
    if (schema.header) {
        for (std::size_t k = 0; k < cols.size(); ++k) row[schema.positions[k]] = cols[k];
        flush();
    }
    for (const auto& day : days) {
        const auto date = format_date(day.date);
        auto emit = [&](SecondOfDay s, std::string v1, std::string v2) {
            row[schema.positions[0]] = date;
            row[schema.positions[1]] = format_time(s);
            row[schema.positions[2]] = std::move(v1);
            row[schema.positions[3]] = std::move(v2);
            flush();
        };
        if (kind == TickKind::trades) {
            for (const auto& t : day.trades)
                emit(t.second_of_day, detail::format_double(t.price), std::to_string(t.volume));
        } else {
            for (const auto& q : day.quotes)
                emit(q.second_of_day, detail::format_double(q.bid), detail::format_double(q.ask));
        }
    }
}

/// Combines separately parsed trades and quotes into one TickDay per date.
inline std::vector<TickDay> merge_trades_quotes(std::vector<TickDay> trade_days,
                                                std::vector<TickDay> quote_days) {
    std::map<Date, TickDay> merged;
    for (auto& d : trade_days) {
        auto& slot = merged[d.date];
        slot.symbol = d.symbol;
        slot.date = d.date;
        slot.trades = std::move(d.trades);
    }
    for (auto& d : quote_days) {
        auto& slot = merged[d.date];
        if (slot.symbol.empty()) slot.symbol = d.symbol;
        slot.date = d.date;
        slot.quotes = std::move(d.quotes);
    }
    std::vector<TickDay> out;
    out.reserve(merged.size());
    for (auto& [_, day] : merged) out.push_back(std::move(day));
    return out;
}

/// Dates with at least one trade, ascending.
inline std::vector<Date> trading_days(std::span<const TickDay> days) {
    std::vector<Date> out;
    for (const auto& d : days)
        if (d.is_trading_day()) out.push_back(d.date);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Common trading days of a pair. Day k (0-based) carries the running label k+1.
struct CommonDays {
    std::vector<Date> dates;

    std::size_t count() const { return dates.size(); }
    bool empty() const { return dates.empty(); }
    int label(std::size_t index) const { return static_cast<int>(index) + 1; }
};

inline CommonDays common_days(std::span<const Date> days_i, std::span<const Date> days_j) {
    std::vector<Date> a(days_i.begin(), days_i.end());
    std::vector<Date> b(days_j.begin(), days_j.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    CommonDays out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out.dates));
    return out;
}

/// Keeps events with open_second <= second_of_day < close_second.
inline TickDay clip_to_grid(const TickDay& day, const IntradayGrid& grid) {
    TickDay out;
    out.symbol = day.symbol;
    out.date = day.date;
    std::copy_if(day.trades.begin(), day.trades.end(), std::back_inserter(out.trades),
                 [&](const TradeEvent& e) { return grid.contains(e.second_of_day); });
    std::copy_if(day.quotes.begin(), day.quotes.end(), std::back_inserter(out.quotes),
                 [&](const QuoteEvent& e) { return grid.contains(e.second_of_day); });
    return out;
}

}  // namespace crossimpact
