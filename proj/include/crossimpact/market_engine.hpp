#pragma once

// All ordered pairs of a universe at once. For each day and lag the response
// sums are one matrix product D_τᵀ E, with D_τ[t, i] = ln m_i(t+τ) − ln m_i(t)
// and E[t, j] = ε_j(t); sign correlator sums are E_τᵀ E in single precision,
// which is exact for integer sums below 2²⁴. Counts come from prefix sums of
// |ε_j|. Days are processed by a worker pool and reduced in day order, so
// results do not depend on the number of workers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "crossimpact/errors.hpp"
#include "crossimpact/lag_grid.hpp"
#include "crossimpact/response.hpp"
#include "crossimpact/series.hpp"

namespace crossimpact {

struct EngineOptions {
    AveragingPolicy policy = AveragingPolicy::nonzero_sign;
    bool response = true;
    bool correlator = true;
};

/// Per-day partial sums, [(i * N + j) * L + k].
struct DayPartial {
    std::vector<std::uint8_t> present;
    std::vector<double> response_sum;
    std::vector<std::uint64_t> response_count;
    std::vector<std::int64_t> correlator_sum;
    std::vector<std::uint64_t> correlator_count;
};

class MarketEngine {
public:
    MarketEngine(std::vector<std::string> symbols, std::vector<int> lags, int slots,
                 EngineOptions options = {})
        : symbols_(std::move(symbols)), lags_(std::move(lags)), slots_(slots), options_(options) {
        validate_lags(lags_);
        if (symbols_.empty()) throw UsageError("market engine needs at least one stock");
        if (slots_ <= 0) throw UsageError("market engine needs a positive slot count");
        const std::size_t cells = symbols_.size() * symbols_.size() * lags_.size();
        const std::size_t nn = symbols_.size() * symbols_.size();
        for (int h = 0; h < 2; ++h) {
            sum_[h].assign(cells, 0.0);
            count_[h].assign(cells, 0);
        }
        corr_sum_.assign(cells, 0);
        corr_count_.assign(cells, 0);
        common_days_.assign(nn, 0);
    }

    std::size_t size() const { return symbols_.size(); }
    const std::vector<int>& lags() const { return lags_; }

    /// One day's sums. `day[i]` is stock i's processed day, or null when the
    /// stock has no record that day. Thread-safe.
    DayPartial compute_day(std::span<const StockDay* const> day) const {
        const auto n = static_cast<Eigen::Index>(size());
        if (day.size() != size()) throw UsageError("market engine: day has the wrong stock count");
        const std::size_t L = lags_.size();
        const std::size_t N = size();
        const Eigen::Index S = slots_;

        DayPartial out;
        out.present.assign(N, 0);
        std::vector<int> first(N, slots_);
        for (std::size_t i = 0; i < N; ++i) {
            const StockDay* d = day[i];
            if (!d || !d->trading_day) continue;
            if (d->signs.slots() != slots_ || d->midpoints.slots() != slots_)
                throw UsageError("market engine: series length differs from the grid");
            out.present[i] = 1;
            first[i] = d->midpoints.first_defined_slot;
        }

        // Prefix counts of nonzero signs: nz[j][t] = #{u < t : ε_j(u) != 0}.
        std::vector<std::vector<std::uint32_t>> nz(N);
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(S, n);
        Eigen::MatrixXd X = Eigen::MatrixXd::Zero(S, n);
        for (std::size_t i = 0; i < N; ++i) {
            if (!out.present[i]) continue;
            const auto& sv = day[i]->signs.values;
            const auto& mv = day[i]->midpoints.values;
            auto& p = nz[i];
            p.assign(static_cast<std::size_t>(S) + 1, 0);
            for (Eigen::Index t = 0; t < S; ++t) {
                const auto ts = static_cast<std::size_t>(t);
                E(t, static_cast<Eigen::Index>(i)) = sv[ts];
                p[ts + 1] = p[ts] + (sv[ts] != 0);
                if (t >= first[i]) X(t, static_cast<Eigen::Index>(i)) = std::log(mv[ts]);
            }
        }

        const std::size_t cells = N * N * L;
        if (options_.response) {
            out.response_sum.assign(cells, 0.0);
            out.response_count.assign(cells, 0);
        }
        if (options_.correlator) {
            out.correlator_sum.assign(cells, 0);
            out.correlator_count.assign(cells, 0);
        }
        const bool nonzero = options_.policy == AveragingPolicy::nonzero_sign;
        Eigen::MatrixXf Ef;
        if (options_.correlator) Ef = E.cast<float>();

        Eigen::MatrixXd D, R;
        Eigen::MatrixXf C;
        for (std::size_t k = 0; k < L; ++k) {
            const Eigen::Index tau = lags_[k];
            if (tau >= S) continue;
            const Eigen::Index rows = S - tau;
            if (options_.response) {
                D = X.middleRows(tau, rows) - X.topRows(rows);
                for (std::size_t i = 0; i < N; ++i) {
                    const auto col = static_cast<Eigen::Index>(i);
                    if (!out.present[i]) D.col(col).setZero();
                    else D.col(col).head(std::min<Eigen::Index>(first[i], rows)).setZero();
                }
                R.noalias() = D.transpose() * E.topRows(rows);
            }
            if (options_.correlator)
                C.noalias() = Ef.middleRows(tau, rows).transpose() * Ef.topRows(rows);

            for (std::size_t i = 0; i < N; ++i) {
                if (!out.present[i]) continue;
                for (std::size_t j = 0; j < N; ++j) {
                    if (!out.present[j]) continue;
                    const std::size_t cell = (i * N + j) * L + k;
                    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                    const auto total = static_cast<std::uint64_t>(rows);
                    const std::uint64_t nz_all = nz[j][static_cast<std::size_t>(rows)];
                    if (options_.response) {
                        const auto f = static_cast<std::size_t>(std::min<Eigen::Index>(first[i], rows));
                        out.response_sum[cell] = R(ii, jj);
                        out.response_count[cell] =
                            nonzero ? nz_all - nz[j][f] : total - static_cast<std::uint64_t>(f);
                    }
                    if (options_.correlator) {
                        out.correlator_sum[cell] = static_cast<std::int64_t>(std::llround(C(ii, jj)));
                        out.correlator_count[cell] = nonzero ? nz_all : total;
                    }
                }
            }
        }
        return out;
    }

    /// Adds a day's partial sums. Days must be added in calendar order for the
    /// odd/even split to follow the pair's running day labels.
    void add(const DayPartial& part) {
        const std::size_t N = size();
        const std::size_t L = lags_.size();
        for (std::size_t i = 0; i < N; ++i) {
            if (!part.present[i]) continue;
            for (std::size_t j = 0; j < N; ++j) {
                if (!part.present[j]) continue;
                const int label = ++common_days_[i * N + j];
                const int half = label % 2 == 1 ? 0 : 1;
                const std::size_t base = (i * N + j) * L;
                for (std::size_t k = 0; k < L; ++k) {
                    if (options_.response) {
                        sum_[half][base + k] += part.response_sum[base + k];
                        count_[half][base + k] += part.response_count[base + k];
                    }
                    if (options_.correlator) {
                        corr_sum_[base + k] += part.correlator_sum[base + k];
                        corr_count_[base + k] += part.correlator_count[base + k];
                    }
                }
            }
        }
    }

    /// Produces and reduces days 0..n_days-1. `load(d, storage, view)` fills
    /// the day's stocks; it runs on worker threads, `jobs` days at a time.
    using DayLoader =
        std::function<void(int, std::vector<StockDay>&, std::vector<const StockDay*>&)>;

    void run(int n_days, const DayLoader& load, int jobs = 1) {
        if (jobs < 1) throw UsageError("jobs must be at least 1");
        std::vector<DayPartial> batch(static_cast<std::size_t>(jobs));
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
        for (int start = 0; start < n_days; start += jobs) {
            const int count = std::min(jobs, n_days - start);
            auto work = [&](int slot) {
                try {
                    std::vector<StockDay> storage;
                    std::vector<const StockDay*> view;
                    load(start + slot, storage, view);
                    batch[static_cast<std::size_t>(slot)] = compute_day(view);
                } catch (...) {
                    errors[static_cast<std::size_t>(slot)] = std::current_exception();
                }
            };
            if (count == 1) {
                work(0);
            } else {
                std::vector<std::thread> pool;
                for (int s = 0; s < count; ++s) pool.emplace_back(work, s);
                for (auto& t : pool) t.join();
            }
            for (int s = 0; s < count; ++s) {
                auto& e = errors[static_cast<std::size_t>(s)];
                if (e) std::rethrow_exception(e);
                add(batch[static_cast<std::size_t>(s)]);
                batch[static_cast<std::size_t>(s)] = {};
            }
        }
    }

    /// Runs over already processed stocks, aligning days by date.
    void run(std::span<const StockSeries> stocks, int jobs = 1) {
        if (stocks.size() != size()) throw UsageError("market engine: stock count mismatch");
        std::vector<Date> dates;
        for (const auto& s : stocks)
            for (const auto& d : s.days) dates.push_back(d.date);
        std::sort(dates.begin(), dates.end());
        dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
        run(static_cast<int>(dates.size()),
            [&](int d, std::vector<StockDay>&, std::vector<const StockDay*>& view) {
                view.clear();
                for (const auto& s : stocks) view.push_back(s.find(dates[static_cast<std::size_t>(d)]));
            },
            jobs);
    }

    PairCurves response() const {
        require(options_.response, "response");
        PairCurves out(CurveKind::response, symbols_, lags_);
        for (std::size_t c = 0; c < out.values.size(); ++c) {
            const std::uint64_t n = count_[0][c] + count_[1][c];
            out.counts[c] = n;
            if (n) out.values[c] = (sum_[0][c] + sum_[1][c]) / static_cast<double>(n);
        }
        return out;
    }

    PairCurves correlator() const {
        require(options_.correlator, "correlator");
        PairCurves out(CurveKind::sign_correlator, symbols_, lags_);
        for (std::size_t c = 0; c < out.values.size(); ++c) {
            out.counts[c] = corr_count_[c];
            if (corr_count_[c])
                out.values[c] = static_cast<double>(corr_sum_[c]) / static_cast<double>(corr_count_[c]);
        }
        return out;
    }

    /// Response noise of every pair from its odd- and even-labelled days;
    /// missing for pairs with fewer than two common days.
    PairCurves response_noise() const {
        require(options_.response, "response");
        PairCurves out(CurveKind::response_noise, symbols_, lags_);
        const std::size_t N = size();
        const std::size_t L = lags_.size();
        auto half = [&](int h, std::size_t c) {
            return count_[h][c] ? sum_[h][c] / static_cast<double>(count_[h][c]) : kMissing;
        };
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = 0; j < N; ++j) {
                if (common_days_[i * N + j] < 2) continue;
                LagCurve odd, even, all;
                for (auto* c : {&odd, &even, &all}) {
                    c->lags = lags_;
                    c->values.resize(L);
                    c->counts.resize(L);
                }
                const std::size_t base = (i * N + j) * L;
                for (std::size_t k = 0; k < L; ++k) {
                    const std::size_t c = base + k;
                    odd.values[k] = half(0, c);
                    even.values[k] = half(1, c);
                    const std::uint64_t n = count_[0][c] + count_[1][c];
                    all.values[k] = n ? (sum_[0][c] + sum_[1][c]) / static_cast<double>(n) : kMissing;
                    all.counts[k] = n;
                }
                out.set(i, j, crossimpact::response_noise(odd, even, all));
            }
        }
        return out;
    }

    int common_days(std::size_t i, std::size_t j) const { return common_days_[i * size() + j]; }

private:
    std::vector<std::string> symbols_;
    std::vector<int> lags_;
    int slots_;
    EngineOptions options_;
    std::vector<double> sum_[2];
    std::vector<std::uint64_t> count_[2];
    std::vector<std::int64_t> corr_sum_;
    std::vector<std::uint64_t> corr_count_;
    std::vector<int> common_days_;

    static void require(bool enabled, const char* what) {
        if (!enabled) throw UsageError(std::string("market engine was built without ") + what);
    }
};

/// Restricts pair curves to a subset of their lags.
inline PairCurves select_lags(const PairCurves& pc, std::span<const int> lags) {
    PairCurves out(pc.kind, pc.symbols, {lags.begin(), lags.end()});
    std::vector<std::size_t> idx;
    for (int tau : lags) idx.push_back(pc.lag_index(tau));
    const std::size_t n = pc.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t q = 0; q < idx.size(); ++q) {
                out.values[out.offset(i, j) + q] = pc.value(i, j, idx[q]);
                out.counts[out.offset(i, j) + q] = pc.count(i, j, idx[q]);
            }
    return out;
}

/// Sorted union of lag grids.
inline std::vector<int> merge_lags(std::span<const int> a, std::span<const int> b) {
    std::vector<int> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace crossimpact
