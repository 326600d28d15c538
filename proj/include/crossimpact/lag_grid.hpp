#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "crossimpact/errors.hpp"

namespace crossimpact {

/// 1, 2, ..., max_lag.
inline std::vector<int> dense_lags(int max_lag = 1000) {
    std::vector<int> out;
    for (int tau = 1; tau <= max_lag; ++tau) out.push_back(tau);
    return out;
}

/// `points` lags spaced geometrically between first and last. Rounded values
/// that collide are bumped up by one second so the grid stays strictly
/// increasing; the last point is always `last`.
inline std::vector<int> log_lags(int points = 34, int first = 1, int last = 10000) {
    if (points < 2 || first < 1 || last <= first || last - first + 1 < points)
        throw UsageError("invalid logarithmic lag grid");
    std::vector<int> out;
    const double ratio = std::log(static_cast<double>(last) / first) / (points - 1);
    for (int k = 0; k < points; ++k) {
        int lag = static_cast<int>(std::lround(first * std::exp(ratio * k)));
        if (!out.empty() && lag <= out.back()) lag = out.back() + 1;
        out.push_back(lag);
    }
    out.back() = last;
    return out;
}

/// Lags at which the market response matrix is usually inspected.
inline std::vector<int> matrix_lags() { return {1, 2, 60, 300, 1800, 7200}; }

inline void validate_lags(std::span<const int> lags) {
    for (std::size_t k = 0; k < lags.size(); ++k) {
        if (lags[k] < 1) throw UsageError("lags must be >= 1 second");
        if (k > 0 && lags[k] <= lags[k - 1]) throw UsageError("lags must be strictly increasing");
    }
}

}  // namespace crossimpact
