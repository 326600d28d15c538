#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crossimpact/ingest.hpp"

namespace crossimpact {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

/// Forward-filled midpoint per grid slot. Slots before the first quote are
/// missing (NaN); every later slot is defined.
struct MidpointSeries {
    std::string symbol;
    Date date;
    std::vector<double> values;
    int first_defined_slot = 0;

    int slots() const { return static_cast<int>(values.size()); }
    bool fully_missing() const { return first_defined_slot >= slots(); }
};

/// values[t] = midpoint of the last quote with second <= open + t. Quotes
/// outside the grid are ignored, so pass a clipped day.
inline MidpointSeries build_midpoints(std::span<const QuoteEvent> quotes,
                                      const IntradayGrid& grid) {
    MidpointSeries out;
    const int slots = grid.slots();
    out.values.assign(static_cast<std::size_t>(slots), kMissing);
    out.first_defined_slot = slots;
    std::size_t q = 0;
    double current = kMissing;
    for (int t = 0; t < slots; ++t) {
        const SecondOfDay now = grid.open_second + t;
        while (q < quotes.size() && quotes[q].second_of_day <= now) {
            if (grid.contains(quotes[q].second_of_day)) current = quotes[q].midpoint();
            ++q;
        }
        out.values[static_cast<std::size_t>(t)] = current;
        if (!is_missing(current) && out.first_defined_slot == slots) out.first_defined_slot = t;
    }
    return out;
}

inline MidpointSeries midpoint_series(const TickDay& day, const IntradayGrid& grid) {
    auto out = build_midpoints(day.quotes, grid);
    out.symbol = day.symbol;
    out.date = day.date;
    return out;
}

/// r(t, τ) = ln m(t+τ) − ln m(t); nullopt when either endpoint is missing or
/// t+τ falls beyond the day's last slot.
inline std::optional<double> log_return(const MidpointSeries& m, int t, int tau) {
    if (t < 0 || tau < 0 || t + tau >= m.slots()) return std::nullopt;
    const double a = m.values[static_cast<std::size_t>(t)];
    const double b = m.values[static_cast<std::size_t>(t + tau)];
    if (is_missing(a) || is_missing(b)) return std::nullopt;
    return std::log(b) - std::log(a);
}

/// ln m(t) per slot, NaN where missing. Estimators work on this form.
inline std::vector<double> log_midpoints(const MidpointSeries& m) {
    std::vector<double> out(m.values.size());
    for (std::size_t t = 0; t < out.size(); ++t)
        out[t] = is_missing(m.values[t]) ? kMissing : std::log(m.values[t]);
    return out;
}

}  // namespace crossimpact
