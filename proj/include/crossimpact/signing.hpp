#pragma once

// Extended tick rule: per-trade signs from consecutive price changes, then a
// per-second sign from the majority of trades in that second.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crossimpact/ingest.hpp"

namespace crossimpact {

using Sign = std::int8_t;

constexpr Sign sgn(double x) { return static_cast<Sign>((x > 0) - (x < 0)); }
constexpr Sign sgn(long long x) { return static_cast<Sign>((x > 0) - (x < 0)); }

/// How trades before the first intraday price change are signed.
struct CarryPolicy {
    enum class Mode { none, carry_in };
    Mode mode = Mode::none;
    Sign carried_sign = 0;  // used by carry_in only

    static CarryPolicy none() { return {}; }
    static CarryPolicy carry_in(Sign s) { return {Mode::carry_in, s}; }
};

/// Per-trade signs aligned with the day's trades; 0 marks an undefined sign.
struct TradeSignSeries {
    std::vector<Sign> signs;
    std::size_t undefined_prefix = 0;
};

/// Per-second sign on the intraday grid, entries in {-1, 0, +1}.
struct SignSeries {
    std::string symbol;
    Date date;
    std::vector<Sign> values;

    int slots() const { return static_cast<int>(values.size()); }

    friend bool operator==(const SignSeries&, const SignSeries&) = default;
};

inline TradeSignSeries classify_trade_signs(std::span<const TradeEvent> trades,
                                            CarryPolicy policy = CarryPolicy::none()) {
    TradeSignSeries out;
    out.signs.resize(trades.size(), 0);
    Sign previous = policy.mode == CarryPolicy::Mode::carry_in ? policy.carried_sign : Sign{0};
    for (std::size_t n = 0; n < trades.size(); ++n) {
        Sign s = previous;
        if (n > 0 && trades[n].price != trades[n - 1].price)
            s = sgn(trades[n].price - trades[n - 1].price);
        out.signs[n] = s;
        previous = s;
    }
    while (out.undefined_prefix < out.signs.size() && out.signs[out.undefined_prefix] == 0)
        ++out.undefined_prefix;
    return out;
}

/// ε(t) = sgn(Σ_n ε(t;n)) over the defined trade signs of second t, 0 if none.
/// Trades outside the grid are ignored.
inline SignSeries aggregate_second_signs(const TradeSignSeries& trade_signs,
                                         std::span<const TradeEvent> trades,
                                         const IntradayGrid& grid) {
    std::vector<int> sums(static_cast<std::size_t>(grid.slots()), 0);
    for (std::size_t n = 0; n < trades.size(); ++n) {
        if (!grid.contains(trades[n].second_of_day)) continue;
        sums[static_cast<std::size_t>(grid.slot_of(trades[n].second_of_day))] +=
            trade_signs.signs[n];
    }
    SignSeries out;
    out.values.resize(sums.size());
    for (std::size_t t = 0; t < sums.size(); ++t) out.values[t] = sgn(static_cast<long long>(sums[t]));
    return out;
}

/// Signs for a day already clipped to the grid.
inline SignSeries sign_series(const TickDay& day, const IntradayGrid& grid,
                              CarryPolicy policy = CarryPolicy::none()) {
    auto trade_signs = classify_trade_signs(day.trades, policy);
    auto out = aggregate_second_signs(trade_signs, day.trades, grid);
    out.symbol = day.symbol;
    out.date = day.date;
    return out;
}

struct SignCounts {
    std::size_t buy_seconds = 0;
    std::size_t sell_seconds = 0;
    std::size_t zero_seconds = 0;
};

inline SignCounts count_signs(const SignSeries& series) {
    SignCounts c;
    for (Sign v : series.values) {
        if (v > 0) ++c.buy_seconds;
        else if (v < 0) ++c.sell_seconds;
        else ++c.zero_seconds;
    }
    return c;
}

}  // namespace crossimpact
