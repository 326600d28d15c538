#pragma once

// Lag statistics for stock pairs and for the market as a whole: response
// functions, trade-sign correlators, response noise, the normalized market
// response matrix, passive/active/market averages and influence rankings.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "crossimpact/errors.hpp"
#include "crossimpact/lag_grid.hpp"
#include "crossimpact/returns.hpp"
#include "crossimpact/series.hpp"
#include "crossimpact/signing.hpp"

namespace crossimpact {

/// Which seconds t enter the time average ⟨·⟩_t.
enum class AveragingPolicy {
    nonzero_sign,  ///< only seconds where the impacting stock's sign is nonzero
    all_seconds,   ///< every second with a defined product
};

enum class CurveKind {
    response,
    sign_correlator,
    response_noise,
    averaged_response,
    averaged_correlator,
};

inline const char* to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::response: return "response";
        case CurveKind::sign_correlator: return "sign_correlator";
        case CurveKind::response_noise: return "response_noise";
        case CurveKind::averaged_response: return "averaged_response";
        case CurveKind::averaged_correlator: return "averaged_correlator";
    }
    return "unknown";
}

inline const char* to_string(AveragingPolicy p) {
    return p == AveragingPolicy::nonzero_sign ? "nonzero_sign" : "all_seconds";
}

/// A statistic as a function of the time lag. Missing values are NaN.
struct LagCurve {
    CurveKind kind = CurveKind::response;
    std::string stock_i;
    std::string stock_j;  // or an aggregate tag such as "market"
    std::vector<int> lags;
    std::vector<double> values;
    std::vector<std::uint64_t> counts;
    /// Standard error of each value when the estimator tracks it, else empty.
    std::vector<double> std_errors;
    bool no_common_days = false;

    std::size_t size() const { return lags.size(); }
    bool defined(std::size_t k) const { return !is_missing(values[k]); }
};

/// Running per-lag sums for a mean of products.
struct LagAccumulator {
    std::vector<double> sum;
    std::vector<double> sum_sq;
    std::vector<std::uint64_t> count;

    explicit LagAccumulator(std::size_t n_lags = 0)
        : sum(n_lags, 0.0), sum_sq(n_lags, 0.0), count(n_lags, 0) {}

    void add(std::size_t k, double x) {
        sum[k] += x;
        sum_sq[k] += x * x;
        ++count[k];
    }

    void merge(const LagAccumulator& other) {
        for (std::size_t k = 0; k < sum.size(); ++k) {
            sum[k] += other.sum[k];
            sum_sq[k] += other.sum_sq[k];
            count[k] += other.count[k];
        }
    }

    LagCurve finish(CurveKind kind, std::span<const int> lags, std::string stock_i,
                    std::string stock_j) const {
        LagCurve out;
        out.kind = kind;
        out.stock_i = std::move(stock_i);
        out.stock_j = std::move(stock_j);
        out.lags.assign(lags.begin(), lags.end());
        out.values.resize(lags.size());
        out.std_errors.resize(lags.size());
        out.counts = count;
        for (std::size_t k = 0; k < lags.size(); ++k) {
            const auto n = static_cast<double>(count[k]);
            out.values[k] = count[k] ? sum[k] / n : kMissing;
            if (count[k] > 1) {
                const double mean = sum[k] / n;
                const double var = std::max(0.0, (sum_sq[k] - n * mean * mean) / (n - 1.0));
                out.std_errors[k] = std::sqrt(var / n);
            } else {
                out.std_errors[k] = kMissing;
            }
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Per-day kernels

namespace detail {

inline std::vector<int> nonzero_slots(std::span<const Sign> signs) {
    std::vector<int> out;
    for (std::size_t t = 0; t < signs.size(); ++t)
        if (signs[t] != 0) out.push_back(static_cast<int>(t));
    return out;
}

}  // namespace detail

/// Adds one day's r_i(t,τ)·ε_j(t) products. `log_mid_i` is ln m_i per slot.
inline void accumulate_response(std::span<const double> log_mid_i, std::span<const Sign> signs_j,
                                std::span<const int> lags, AveragingPolicy policy,
                                LagAccumulator& acc) {
    const int slots = static_cast<int>(std::min(log_mid_i.size(), signs_j.size()));
    if (policy == AveragingPolicy::nonzero_sign) {
        const auto active = detail::nonzero_slots(signs_j.first(static_cast<std::size_t>(slots)));
        for (std::size_t k = 0; k < lags.size(); ++k) {
            const int tau = lags[k];
            for (int t : active) {
                if (t + tau >= slots) break;
                const double a = log_mid_i[static_cast<std::size_t>(t)];
                const double b = log_mid_i[static_cast<std::size_t>(t + tau)];
                if (is_missing(a) || is_missing(b)) continue;
                acc.add(k, (b - a) * signs_j[static_cast<std::size_t>(t)]);
            }
        }
        return;
    }
    for (std::size_t k = 0; k < lags.size(); ++k) {
        const int tau = lags[k];
        for (int t = 0; t + tau < slots; ++t) {
            const double a = log_mid_i[static_cast<std::size_t>(t)];
            const double b = log_mid_i[static_cast<std::size_t>(t + tau)];
            if (is_missing(a) || is_missing(b)) continue;
            acc.add(k, (b - a) * signs_j[static_cast<std::size_t>(t)]);
        }
    }
}

/// Adds one day's ε_i(t+τ)·ε_j(t) products.
inline void accumulate_correlator(std::span<const Sign> signs_i, std::span<const Sign> signs_j,
                                  std::span<const int> lags, AveragingPolicy policy,
                                  LagAccumulator& acc) {
    const int slots = static_cast<int>(std::min(signs_i.size(), signs_j.size()));
    if (policy == AveragingPolicy::nonzero_sign) {
        const auto active = detail::nonzero_slots(signs_j.first(static_cast<std::size_t>(slots)));
        for (std::size_t k = 0; k < lags.size(); ++k) {
            const int tau = lags[k];
            for (int t : active) {
                if (t + tau >= slots) break;
                acc.add(k, static_cast<double>(signs_i[static_cast<std::size_t>(t + tau)] *
                                               signs_j[static_cast<std::size_t>(t)]));
            }
        }
        return;
    }
    for (std::size_t k = 0; k < lags.size(); ++k) {
        const int tau = lags[k];
        for (int t = 0; t + tau < slots; ++t)
            acc.add(k, static_cast<double>(signs_i[static_cast<std::size_t>(t + tau)] *
                                           signs_j[static_cast<std::size_t>(t)]));
    }
}

// ---------------------------------------------------------------------------
// Pair estimators

/// R_ij(τ) = ⟨r_i(t,τ) ε_j(t)⟩ over day-aligned series. i = j gives the
/// self-response.
inline LagCurve cross_response(std::span<const MidpointSeries> mids_i,
                               std::span<const SignSeries> signs_j, std::span<const int> lags,
                               AveragingPolicy policy = AveragingPolicy::nonzero_sign) {
    validate_lags(lags);
    if (mids_i.size() != signs_j.size())
        throw UsageError("cross_response: midpoint and sign day counts differ");
    LagAccumulator acc(lags.size());
    for (std::size_t d = 0; d < mids_i.size(); ++d)
        accumulate_response(log_midpoints(mids_i[d]), signs_j[d].values, lags, policy, acc);
    auto out = acc.finish(CurveKind::response, lags, mids_i.empty() ? "" : mids_i[0].symbol,
                          signs_j.empty() ? "" : signs_j[0].symbol);
    out.no_common_days = mids_i.empty();
    return out;
}

inline LagCurve cross_response(std::span<const PairDay> days, std::span<const int> lags,
                               AveragingPolicy policy = AveragingPolicy::nonzero_sign) {
    validate_lags(lags);
    LagAccumulator acc(lags.size());
    for (const auto& d : days)
        accumulate_response(log_midpoints(d.day_i->midpoints), d.day_j->signs.values, lags, policy,
                            acc);
    auto out = acc.finish(CurveKind::response, lags,
                          days.empty() ? "" : days.front().day_i->midpoints.symbol,
                          days.empty() ? "" : days.front().day_j->signs.symbol);
    out.no_common_days = days.empty();
    return out;
}

inline LagCurve cross_response(const StockSeries& i, const StockSeries& j,
                               std::span<const int> lags,
                               AveragingPolicy policy = AveragingPolicy::nonzero_sign) {
    auto out = cross_response(align_pair(i, j), lags, policy);
    out.stock_i = i.symbol;
    out.stock_j = j.symbol;
    return out;
}

/// Θ_ij(τ) = ⟨ε_i(t+τ) ε_j(t)⟩.
inline LagCurve sign_correlator(std::span<const SignSeries> signs_i,
                                std::span<const SignSeries> signs_j, std::span<const int> lags,
                                AveragingPolicy policy = AveragingPolicy::nonzero_sign) {
    validate_lags(lags);
    if (signs_i.size() != signs_j.size())
        throw UsageError("sign_correlator: day counts differ");
    LagAccumulator acc(lags.size());
    for (std::size_t d = 0; d < signs_i.size(); ++d)
        accumulate_correlator(signs_i[d].values, signs_j[d].values, lags, policy, acc);
    auto out = acc.finish(CurveKind::sign_correlator, lags,
                          signs_i.empty() ? "" : signs_i[0].symbol,
                          signs_j.empty() ? "" : signs_j[0].symbol);
    out.no_common_days = signs_i.empty();
    return out;
}

inline LagCurve sign_correlator(std::span<const PairDay> days, std::span<const int> lags,
                                AveragingPolicy policy = AveragingPolicy::nonzero_sign) {
    validate_lags(lags);
    LagAccumulator acc(lags.size());
    for (const auto& d : days)
        accumulate_correlator(d.day_i->signs.values, d.day_j->signs.values, lags, policy, acc);
    auto out = acc.finish(CurveKind::sign_correlator, lags,
                          days.empty() ? "" : days.front().day_i->signs.symbol,
                          days.empty() ? "" : days.front().day_j->signs.symbol);
    out.no_common_days = days.empty();
    return out;
}

inline LagCurve sign_correlator(const StockSeries& i, const StockSeries& j,
                                std::span<const int> lags,
                                AveragingPolicy policy = AveragingPolicy::nonzero_sign) {
    auto out = sign_correlator(align_pair(i, j), lags, policy);
    out.stock_i = i.symbol;
    out.stock_j = j.symbol;
    return out;
}

/// ν(τ) = sqrt(½ Σ_k (R^(k)(τ) − R(τ))²) / |R(τ)|; missing where R is zero or
/// any input is missing.
inline LagCurve response_noise(const LagCurve& odd, const LagCurve& even, const LagCurve& all) {
    if (odd.size() != all.size() || even.size() != all.size())
        throw UsageError("response_noise: curves must share a lag grid");
    LagCurve out;
    out.kind = CurveKind::response_noise;
    out.stock_i = all.stock_i;
    out.stock_j = all.stock_j;
    out.lags = all.lags;
    out.counts = all.counts;
    out.values.resize(all.size());
    for (std::size_t k = 0; k < all.size(); ++k) {
        const double r = all.values[k];
        const double r1 = odd.values[k];
        const double r2 = even.values[k];
        if (is_missing(r) || is_missing(r1) || is_missing(r2) || r == 0.0) {
            out.values[k] = kMissing;
            continue;
        }
        const double d1 = r1 - r;
        const double d2 = r2 - r;
        out.values[k] = std::sqrt(0.5 * (d1 * d1 + d2 * d2)) / std::abs(r);
    }
    return out;
}

/// Splits the pair's common days by odd/even running label and measures how
/// far each half's response lies from the all-days response.
inline LagCurve response_noise(std::span<const PairDay> days, std::span<const int> lags,
                               AveragingPolicy policy = AveragingPolicy::nonzero_sign) {
    validate_lags(lags);
    if (days.size() < 2)
        throw NumericError("response noise needs at least two common trading days");
    LagAccumulator odd(lags.size()), even(lags.size());
    for (const auto& d : days)
        accumulate_response(log_midpoints(d.day_i->midpoints), d.day_j->signs.values, lags, policy,
                            d.label % 2 == 1 ? odd : even);
    LagAccumulator all = odd;
    all.merge(even);
    const std::string si = days.front().day_i->midpoints.symbol;
    const std::string sj = days.front().day_j->signs.symbol;
    return response_noise(odd.finish(CurveKind::response, lags, si, sj),
                          even.finish(CurveKind::response, lags, si, sj),
                          all.finish(CurveKind::response, lags, si, sj));
}

inline LagCurve response_noise(const StockSeries& i, const StockSeries& j,
                               std::span<const int> lags,
                               AveragingPolicy policy = AveragingPolicy::nonzero_sign) {
    auto out = response_noise(align_pair(i, j), lags, policy);
    out.stock_i = i.symbol;
    out.stock_j = j.symbol;
    return out;
}

// ---------------------------------------------------------------------------
// All ordered pairs of a universe

/// Curves for every ordered pair (i, j) of a universe, diagonal included.
struct PairCurves {
    CurveKind kind = CurveKind::response;
    std::vector<std::string> symbols;
    std::vector<int> lags;
    std::vector<double> values;          // [(i * N + j) * L + k]
    std::vector<std::uint64_t> counts;   // same layout

    PairCurves() = default;
    PairCurves(CurveKind k, std::vector<std::string> syms, std::vector<int> lag_grid)
        : kind(k), symbols(std::move(syms)), lags(std::move(lag_grid)) {
        const std::size_t n = symbols.size() * symbols.size() * lags.size();
        values.assign(n, kMissing);
        counts.assign(n, 0);
    }

    std::size_t size() const { return symbols.size(); }
    std::size_t offset(std::size_t i, std::size_t j) const {
        return (i * size() + j) * lags.size();
    }
    double value(std::size_t i, std::size_t j, std::size_t k) const {
        return values[offset(i, j) + k];
    }
    std::uint64_t count(std::size_t i, std::size_t j, std::size_t k) const {
        return counts[offset(i, j) + k];
    }

    std::size_t index_of(const std::string& symbol) const {
        auto it = std::find(symbols.begin(), symbols.end(), symbol);
        if (it == symbols.end()) throw UsageError("unknown symbol: " + symbol);
        return static_cast<std::size_t>(it - symbols.begin());
    }
    std::size_t lag_index(int tau) const {
        auto it = std::find(lags.begin(), lags.end(), tau);
        if (it == lags.end()) throw UsageError("lag not computed: " + std::to_string(tau));
        return static_cast<std::size_t>(it - lags.begin());
    }

    LagCurve curve(std::size_t i, std::size_t j) const {
        LagCurve out;
        out.kind = kind;
        out.stock_i = symbols[i];
        out.stock_j = symbols[j];
        out.lags = lags;
        const auto o = offset(i, j);
        out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(o),
                          values.begin() + static_cast<std::ptrdiff_t>(o + lags.size()));
        out.counts.assign(counts.begin() + static_cast<std::ptrdiff_t>(o),
                          counts.begin() + static_cast<std::ptrdiff_t>(o + lags.size()));
        return out;
    }

    void set(std::size_t i, std::size_t j, const LagCurve& c) {
        const auto o = offset(i, j);
        std::copy(c.values.begin(), c.values.end(), values.begin() + static_cast<std::ptrdiff_t>(o));
        std::copy(c.counts.begin(), c.counts.end(), counts.begin() + static_cast<std::ptrdiff_t>(o));
    }
};

/// Pair-by-pair evaluation of every ordered pair. Suitable for small
/// universes; MarketEngine does the same job with blocked products.
inline PairCurves pair_curves_direct(std::span<const StockSeries> stocks,
                                     std::span<const int> lags, CurveKind kind,
                                     AveragingPolicy policy = AveragingPolicy::nonzero_sign) {
    if (kind != CurveKind::response && kind != CurveKind::sign_correlator)
        throw UsageError("pair_curves_direct: kind must be response or sign_correlator");
    std::vector<std::string> symbols;
    for (const auto& s : stocks) symbols.push_back(s.symbol);
    PairCurves out(kind, symbols, {lags.begin(), lags.end()});
    for (std::size_t i = 0; i < stocks.size(); ++i)
        for (std::size_t j = 0; j < stocks.size(); ++j)
            out.set(i, j,
                    kind == CurveKind::response
                        ? cross_response(stocks[i], stocks[j], lags, policy)
                        : sign_correlator(stocks[i], stocks[j], lags, policy));
    return out;
}

// ---------------------------------------------------------------------------
// Averages

/// Every stock except `fixed`.
inline std::vector<std::size_t> market_pool(std::size_t n, std::size_t fixed) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k)
        if (k != fixed) out.push_back(k);
    return out;
}

/// Members of `sector` except `fixed`.
inline std::vector<std::size_t> sector_pool(std::span<const std::string> sectors,
                                            const std::string& sector, std::size_t fixed) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < sectors.size(); ++k)
        if (k != fixed && sectors[k] == sector) out.push_back(k);
    return out;
}

namespace detail {

inline LagCurve pool_average(const PairCurves& pc, std::size_t fixed,
                             std::span<const std::size_t> pool, bool fixed_is_row,
                             const std::string& pool_tag) {
    std::vector<std::size_t> members;
    for (auto p : pool)
        if (p != fixed) members.push_back(p);
    if (members.empty()) throw UsageError("average over an empty pool");

    const std::size_t L = pc.lags.size();
    LagCurve out;
    out.kind = pc.kind == CurveKind::sign_correlator ? CurveKind::averaged_correlator
                                                     : CurveKind::averaged_response;
    out.stock_i = fixed_is_row ? pc.symbols[fixed] : pool_tag;
    out.stock_j = fixed_is_row ? pool_tag : pc.symbols[fixed];
    out.lags = pc.lags;
    out.values.assign(L, kMissing);
    out.counts.assign(L, 0);
    for (std::size_t k = 0; k < L; ++k) {
        double sum = 0.0;
        std::size_t defined = 0;
        for (auto m : members) {
            const std::size_t i = fixed_is_row ? fixed : m;
            const std::size_t j = fixed_is_row ? m : fixed;
            const double v = pc.value(i, j, k);
            if (is_missing(v)) continue;
            sum += v;
            ++defined;
            out.counts[k] += pc.count(i, j, k);
        }
        if (defined) out.values[k] = sum / static_cast<double>(defined);
    }
    return out;
}

}  // namespace detail

/// R_i^(p)(τ) = ⟨R_ij(τ)⟩_j over the pool (or Θ_i^(p) for correlator curves).
inline LagCurve passive_average(const PairCurves& pc, std::size_t i,
                                std::span<const std::size_t> pool,
                                const std::string& pool_tag = "market") {
    return detail::pool_average(pc, i, pool, true, pool_tag);
}

/// R_j^(a)(τ) = ⟨R_ij(τ)⟩_i over the pool (or Θ_j^(a) for correlator curves).
inline LagCurve active_average(const PairCurves& pc, std::size_t j,
                               std::span<const std::size_t> pool,
                               const std::string& pool_tag = "market") {
    return detail::pool_average(pc, j, pool, false, pool_tag);
}

/// R̄(τ) = ⟨⟨R_ij(τ)⟩_j⟩_i with i = j excluded, as a literal two-stage mean.
inline LagCurve market_average(const PairCurves& pc) {
    const std::size_t n = pc.size();
    const std::size_t L = pc.lags.size();
    LagCurve out;
    out.kind = pc.kind == CurveKind::sign_correlator ? CurveKind::averaged_correlator
                                                     : CurveKind::averaged_response;
    out.stock_i = "market";
    out.stock_j = "market";
    out.lags = pc.lags;
    out.values.assign(L, kMissing);
    out.counts.assign(L, 0);
    for (std::size_t k = 0; k < L; ++k) {
        double outer = 0.0;
        std::size_t rows = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double inner = 0.0;
            std::size_t cols = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double v = pc.value(i, j, k);
                if (is_missing(v)) continue;
                inner += v;
                ++cols;
                out.counts[k] += pc.count(i, j, k);
            }
            if (!cols) continue;
            outer += inner / static_cast<double>(cols);
            ++rows;
        }
        if (rows) out.values[k] = outer / static_cast<double>(rows);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Market response matrix

inline const std::vector<std::string>& default_sector_order() {
    static const std::vector<std::string> order{"I", "HC", "CD", "IT", "U",
                                                "F", "M",  "E",  "CS", "TS"};
    return order;
}

struct ResponseMatrix {
    int tau = 0;
    std::vector<std::string> symbols;   // grouped by sector
    std::vector<std::string> sectors;   // aligned with symbols
    std::vector<std::size_t> sector_boundaries;  // first index of each sector block
    std::vector<double> raw;         // row-major N×N, row = i (price), col = j (trades)
    std::vector<double> normalized;  // raw / normalizer
    double normalizer = 0.0;         // max |raw| over all entries
    bool degenerate = false;         // normalizer is zero or undefined

    std::size_t size() const { return symbols.size(); }
    double at(std::size_t i, std::size_t j) const { return normalized[i * size() + j]; }
};

/// ρ_ij(τ) = R_ij(τ) / max_(i,j) |R_ij(τ)|, with rows and columns grouped by
/// sector in `sector_order` (unknown sectors follow in order of appearance).
inline ResponseMatrix market_response_matrix(
    std::span<const std::string> symbols, std::span<const std::string> sectors,
    std::span<const double> raw_row_major, int tau,
    std::span<const std::string> sector_order = default_sector_order()) {
    const std::size_t n = symbols.size();
    if (n == 0) throw UsageError("market response matrix needs at least one stock");
    if (sectors.size() != n || raw_row_major.size() != n * n)
        throw UsageError("market response matrix: inconsistent dimensions");

    std::vector<std::string> order(sector_order.begin(), sector_order.end());
    for (const auto& s : sectors)
        if (std::find(order.begin(), order.end(), s) == order.end()) order.push_back(s);
    auto rank = [&](const std::string& s) {
        return std::find(order.begin(), order.end(), s) - order.begin();
    };
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t a, std::size_t b) { return rank(sectors[a]) < rank(sectors[b]); });

    ResponseMatrix m;
    m.tau = tau;
    m.raw.resize(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        m.symbols.push_back(symbols[perm[a]]);
        m.sectors.push_back(sectors[perm[a]]);
        if (a == 0 || m.sectors[a] != m.sectors[a - 1]) m.sector_boundaries.push_back(a);
        for (std::size_t b = 0; b < n; ++b) m.raw[a * n + b] = raw_row_major[perm[a] * n + perm[b]];
    }
    double top = 0.0;
    for (double v : m.raw)
        if (!is_missing(v)) top = std::max(top, std::abs(v));
    m.normalizer = top;
    m.degenerate = !(top > 0.0);
    m.normalized.resize(n * n);
    for (std::size_t k = 0; k < n * n; ++k)
        m.normalized[k] = m.degenerate ? kMissing : m.raw[k] / top;
    return m;
}

inline ResponseMatrix market_response_matrix(
    const PairCurves& pc, std::span<const std::string> sectors, int tau,
    std::span<const std::string> sector_order = default_sector_order()) {
    const std::size_t n = pc.size();
    const std::size_t k = pc.lag_index(tau);
    std::vector<double> raw(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) raw[i * n + j] = pc.value(i, j, k);
    return market_response_matrix(pc.symbols, sectors, raw, tau, sector_order);
}

// ---------------------------------------------------------------------------
// Influence ranking

struct RankEntry {
    std::string symbol;
    std::vector<double> values;  // aligned with the ranking lags
};

/// Descending by values[primary]; ties broken alphabetically, missing last.
inline std::vector<RankEntry> rank_by_response(std::span<const RankEntry> entries,
                                               std::size_t primary, std::size_t k) {
    std::vector<RankEntry> sorted(entries.begin(), entries.end());
    for (const auto& e : sorted)
        if (primary >= e.values.size()) throw UsageError("rank: primary lag index out of range");
    std::stable_sort(sorted.begin(), sorted.end(), [&](const RankEntry& a, const RankEntry& b) {
        const double va = a.values[primary];
        const double vb = b.values[primary];
        const bool ma = is_missing(va), mb = is_missing(vb);
        if (ma != mb) return mb;
        if (!ma && va != vb) return va > vb;
        return a.symbol < b.symbol;
    });
    if (k < sorted.size()) sorted.resize(k);
    return sorted;
}

enum class InfluenceMode { passive, active };

/// Whole-market passive or active responses of every stock at `lags`, each
/// divided by that lag's matrix normalizer max_(i,j) |R_ij(τ)|.
inline std::vector<RankEntry> influence_entries(const PairCurves& pc, InfluenceMode mode,
                                                std::span<const int> lags) {
    const std::size_t n = pc.size();
    std::vector<std::size_t> lag_idx;
    std::vector<double> normalizer;
    for (int tau : lags) {
        const std::size_t k = pc.lag_index(tau);
        lag_idx.push_back(k);
        double top = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double v = pc.value(i, j, k);
                if (!is_missing(v)) top = std::max(top, std::abs(v));
            }
        normalizer.push_back(top);
    }
    std::vector<RankEntry> out;
    for (std::size_t s = 0; s < n; ++s) {
        const auto pool = market_pool(n, s);
        const auto curve = mode == InfluenceMode::passive ? passive_average(pc, s, pool)
                                                          : active_average(pc, s, pool);
        RankEntry e{pc.symbols[s], {}};
        for (std::size_t q = 0; q < lags.size(); ++q) {
            const double v = curve.values[lag_idx[q]];
            e.values.push_back(normalizer[q] > 0.0 && !is_missing(v) ? v / normalizer[q]
                                                                      : kMissing);
        }
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace crossimpact
