#pragma once

// Naive reference estimators: plain loops over (day, t, tau) written straight
// from the defining averages, with no shared code paths into the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace oracle {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

/// One day of one pair: raw midpoints of i (NaN = missing) and signs of i, j.
struct Day {
    std::vector<double> mid_i;
    std::vector<int> sign_i;
    std::vector<int> sign_j;
};

struct Curve {
    std::vector<double> value;
    std::vector<std::uint64_t> count;
};

/// R(τ) = mean over (day, t) of [ln m_i(t+τ) − ln m_i(t)] ε_j(t).
inline Curve response(std::span<const Day> days, std::span<const int> lags, bool nonzero_only) {
    std::vector<double> sum(lags.size(), 0.0);
    std::vector<std::uint64_t> n(lags.size(), 0);
    for (const auto& d : days) {
        const int T = static_cast<int>(d.sign_j.size());
        for (int t = 0; t < T; ++t) {
            if (nonzero_only && d.sign_j[t] == 0) continue;
            for (std::size_t k = 0; k < lags.size(); ++k) {
                const int u = t + lags[k];
                if (u >= T) continue;
                if (std::isnan(d.mid_i[t]) || std::isnan(d.mid_i[u])) continue;
                sum[k] += (std::log(d.mid_i[u]) - std::log(d.mid_i[t])) * d.sign_j[t];
                ++n[k];
            }
        }
    }
    Curve c;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        c.value.push_back(n[k] ? sum[k] / static_cast<double>(n[k]) : nan);
        c.count.push_back(n[k]);
    }
    return c;
}

/// Θ(τ) = mean over (day, t) of ε_i(t+τ) ε_j(t).
inline Curve correlator(std::span<const Day> days, std::span<const int> lags, bool nonzero_only) {
    std::vector<long long> sum(lags.size(), 0);
    std::vector<std::uint64_t> n(lags.size(), 0);
    for (const auto& d : days) {
        const int T = static_cast<int>(d.sign_j.size());
        for (int t = 0; t < T; ++t) {
            if (nonzero_only && d.sign_j[t] == 0) continue;
            for (std::size_t k = 0; k < lags.size(); ++k) {
                const int u = t + lags[k];
                if (u >= T) continue;
                sum[k] += d.sign_i[u] * d.sign_j[t];
                ++n[k];
            }
        }
    }
    Curve c;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        c.value.push_back(n[k] ? static_cast<double>(sum[k]) / static_cast<double>(n[k]) : nan);
        c.count.push_back(n[k]);
    }
    return c;
}

/// ν(τ) from days 1, 3, 5, ... versus 2, 4, 6, ... (1-based).
inline std::vector<double> noise(std::span<const Day> days, std::span<const int> lags,
                                 bool nonzero_only) {
    std::vector<Day> odd, even;
    for (std::size_t d = 0; d < days.size(); ++d) (d % 2 == 0 ? odd : even).push_back(days[d]);
    const auto all = response(days, lags, nonzero_only);
    const auto r1 = response(odd, lags, nonzero_only);
    const auto r2 = response(even, lags, nonzero_only);
    std::vector<double> out;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        const double r = all.value[k];
        if (std::isnan(r) || std::isnan(r1.value[k]) || std::isnan(r2.value[k]) || r == 0.0) {
            out.push_back(nan);
            continue;
        }
        const double a = r1.value[k] - r, b = r2.value[k] - r;
        out.push_back(std::sqrt((a * a + b * b) / 2.0) / std::fabs(r));
    }
    return out;
}

/// value[i][j] for one lag; NaN entries are skipped.
using Grid = std::vector<std::vector<double>>;

inline double passive(const Grid& g, std::size_t i) {
    double s = 0;
    int n = 0;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (j != i && !std::isnan(g[i][j])) s += g[i][j], ++n;
    return n ? s / n : nan;
}

inline double active(const Grid& g, std::size_t j) {
    double s = 0;
    int n = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (i != j && !std::isnan(g[i][j])) s += g[i][j], ++n;
    return n ? s / n : nan;
}

inline double market(const Grid& g) {
    double s = 0;
    int n = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double p = passive(g, i);
        if (!std::isnan(p)) s += p, ++n;
    }
    return n ? s / n : nan;
}

inline double rel_err(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b) ? 0.0 : INFINITY;
    const double scale = std::max(std::fabs(a), std::fabs(b));
    return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

}  // namespace oracle
