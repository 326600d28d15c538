#pragma once

// Per-stock containers of processed daily series, and pair alignment over
// common trading days.

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "crossimpact/ingest.hpp"
#include "crossimpact/returns.hpp"
#include "crossimpact/signing.hpp"

namespace crossimpact {

struct StockDay {
    Date date;
    bool trading_day = true;
    SignSeries signs;
    MidpointSeries midpoints;
};

struct StockSeries {
    std::string symbol;
    std::string sector;
    std::vector<StockDay> days;  // ascending by date

    std::vector<Date> trading_dates() const {
        std::vector<Date> out;
        for (const auto& d : days)
            if (d.trading_day) out.push_back(d.date);
        return out;
    }

    const StockDay* find(const Date& date) const {
        auto it = std::lower_bound(days.begin(), days.end(), date,
                                   [](const StockDay& d, const Date& x) { return d.date < x; });
        return it != days.end() && it->date == date ? &*it : nullptr;
    }
};

/// Builds one StockDay from a raw day: clip to the grid, sign, take midpoints.
/// The trading-day flag is decided on the unclipped day.
inline StockDay process_day(const TickDay& raw, const IntradayGrid& grid,
                            CarryPolicy policy = CarryPolicy::none()) {
    const TickDay day = clip_to_grid(raw, grid);
    StockDay out;
    out.date = raw.date;
    out.trading_day = raw.is_trading_day();
    out.signs = sign_series(day, grid, policy);
    out.midpoints = midpoint_series(day, grid);
    return out;
}

inline StockSeries process_stock(const std::string& symbol, std::span<const TickDay> raw_days,
                                 const IntradayGrid& grid,
                                 CarryPolicy policy = CarryPolicy::none()) {
    StockSeries out;
    out.symbol = symbol;
    for (const auto& raw : raw_days) out.days.push_back(process_day(raw, grid, policy));
    std::sort(out.days.begin(), out.days.end(),
              [](const StockDay& a, const StockDay& b) { return a.date < b.date; });
    return out;
}

/// One common trading day of a pair (i, j). `label` is the running day number
/// 1..T over the pair's common days.
struct PairDay {
    const StockDay* day_i = nullptr;
    const StockDay* day_j = nullptr;
    int label = 0;
};

inline std::vector<PairDay> align_pair(const StockSeries& i, const StockSeries& j) {
    const auto di = i.trading_dates();
    const auto dj = j.trading_dates();
    const auto common = common_days(di, dj);
    std::vector<PairDay> out;
    out.reserve(common.count());
    for (std::size_t k = 0; k < common.count(); ++k)
        out.push_back({i.find(common.dates[k]), j.find(common.dates[k]), common.label(k)});
    return out;
}

}  // namespace crossimpact
