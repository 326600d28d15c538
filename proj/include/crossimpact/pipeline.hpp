#pragma once

// End-to-end runs: load or synthesize the universe, compute every ordered
// pair with MarketEngine, write the requested artifacts and a manifest of
// input and output digests.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "crossimpact/config.hpp"
#include "crossimpact/errors.hpp"
#include "crossimpact/fitting.hpp"
#include "crossimpact/ingest.hpp"
#include "crossimpact/io.hpp"
#include "crossimpact/market_engine.hpp"
#include "crossimpact/response.hpp"
#include "crossimpact/series.hpp"
#include "crossimpact/synth.hpp"

namespace crossimpact {

inline constexpr const char* kVersion = "0.1.0";

/// Per-symbol ingest outcome.
struct IngestSummary {
    std::string symbol;
    ParseReport trades;
    ParseReport quotes;
    std::size_t days = 0;
    std::size_t trading_days = 0;
};

/// The configured universe, backed by tick files or by a synthesizer. Days
/// are materialized on demand.
class MarketData {
public:
    static MarketData open(const RunConfig& cfg) {
        MarketData m;
        m.grid_ = cfg.grid;
        m.carry_ = cfg.carry;
        if (cfg.synth) {
            const auto& spec = *cfg.synth;
            std::optional<SignCalibration> calibration;
            if (!spec.targets.empty()) {
                const auto path = cfg.calibration_path();
                if (!fs::exists(path)) throw DataError("missing input: " + path);
                calibration = SignCalibration::load(path);
                m.inputs_.push_back(path);
            }
            m.synth_.emplace(spec, calibration ? &*calibration : nullptr);
            if (cfg.universe.empty()) {
                for (std::size_t k = 0; k < spec.stocks.size(); ++k) {
                    m.symbols_.push_back(spec.stocks[k].symbol);
                    m.sectors_.push_back(spec.stocks[k].sector);
                    m.synth_index_.push_back(k);
                }
            } else {
                for (const auto& u : cfg.universe) {
                    const auto k = detail::symbol_index(spec.stocks, u.symbol);
                    m.symbols_.push_back(u.symbol);
                    m.sectors_.push_back(u.sector.empty() ? spec.stocks[k].sector : u.sector);
                    m.synth_index_.push_back(k);
                }
            }
            for (int d = 0; d < spec.n_days; ++d) m.dates_.push_back(m.synth_->date_of(d));
            return m;
        }

        if (!cfg.data) throw UsageError("config: no input (data or synth) given");
        std::vector<UniverseEntry> universe = cfg.universe;
        if (universe.empty()) {
            const auto path = cfg.roster_path();
            if (!fs::exists(path)) throw DataError("missing input: " + path);
            for (const auto& r : load_roster(path)) universe.push_back({r.symbol, r.sector});
        }
        for (const auto& u : universe) {
            for (const auto& p : {cfg.data->trades_for(u.symbol), cfg.data->quotes_for(u.symbol)})
                if (!fs::exists(p)) throw DataError("missing input: " + p);
        }
        std::vector<Date> all_dates;
        for (const auto& u : universe) {
            const auto tpath = cfg.data->trades_for(u.symbol);
            const auto qpath = cfg.data->quotes_for(u.symbol);
            m.inputs_.push_back(tpath);
            m.inputs_.push_back(qpath);
            std::ifstream tin(tpath), qin(qpath);
            if (!tin) throw DataError("cannot open " + tpath);
            if (!qin) throw DataError("cannot open " + qpath);
            auto trades = parse_tick_file(tin, cfg.data->schema, TickKind::trades, u.symbol);
            auto quotes = parse_tick_file(qin, cfg.data->schema, TickKind::quotes, u.symbol);
            IngestSummary summary{u.symbol, trades.report, quotes.report, 0, 0};
            auto days = merge_trades_quotes(std::move(trades.days), std::move(quotes.days));
            std::map<Date, TickDay> by_date;
            for (auto& d : days) {
                d.symbol = u.symbol;
                ++summary.days;
                summary.trading_days += d.is_trading_day();
                all_dates.push_back(d.date);
                by_date.emplace(d.date, std::move(d));
            }
            m.raw_.push_back(std::move(by_date));
            m.ingest_.push_back(summary);
            m.symbols_.push_back(u.symbol);
            m.sectors_.push_back(u.sector);
        }
        std::sort(all_dates.begin(), all_dates.end());
        all_dates.erase(std::unique(all_dates.begin(), all_dates.end()), all_dates.end());
        m.dates_ = std::move(all_dates);
        return m;
    }

    std::size_t size() const { return symbols_.size(); }
    const std::vector<std::string>& symbols() const { return symbols_; }
    const std::vector<std::string>& sectors() const { return sectors_; }
    const std::vector<Date>& dates() const { return dates_; }
    int n_days() const { return static_cast<int>(dates_.size()); }
    const std::vector<std::string>& input_files() const { return inputs_; }
    const std::vector<IngestSummary>& ingest_summaries() const { return ingest_; }
    const MarketSynthesizer* synthesizer() const { return synth_ ? &*synth_ : nullptr; }

    std::size_t index_of(const std::string& symbol) const {
        auto it = std::find(symbols_.begin(), symbols_.end(), symbol);
        if (it == symbols_.end()) throw UsageError("symbol not in universe: " + symbol);
        return static_cast<std::size_t>(it - symbols_.begin());
    }

    /// Day d of every stock; view[i] is null when stock i has no record.
    void load_day(int d, std::vector<StockDay>& storage, std::vector<const StockDay*>& view) const {
        storage.clear();
        view.assign(size(), nullptr);
        storage.reserve(size());
        if (synth_) {
            const auto day = synth_->generate_day(d);
            for (std::size_t i = 0; i < size(); ++i) storage.push_back(synth_->stock_day(day, synth_index_[i]));
            for (std::size_t i = 0; i < size(); ++i) view[i] = &storage[i];
            return;
        }
        const Date date = dates_[static_cast<std::size_t>(d)];
        std::vector<std::size_t> owner;
        for (std::size_t i = 0; i < size(); ++i) {
            auto it = raw_[i].find(date);
            if (it == raw_[i].end()) continue;
            storage.push_back(process_day(it->second, grid_, carry_));
            owner.push_back(i);
        }
        for (std::size_t k = 0; k < owner.size(); ++k) view[owner[k]] = &storage[k];
    }

    /// Whole processed series of a subset of stocks.
    std::vector<StockSeries> series(std::span<const std::size_t> which) const {
        std::vector<StockSeries> out(which.size());
        for (std::size_t k = 0; k < which.size(); ++k) {
            out[k].symbol = symbols_[which[k]];
            out[k].sector = sectors_[which[k]];
        }
        std::vector<StockDay> storage;
        std::vector<const StockDay*> view;
        for (int d = 0; d < n_days(); ++d) {
            load_day(d, storage, view);
            for (std::size_t k = 0; k < which.size(); ++k)
                if (view[which[k]]) out[k].days.push_back(*view[which[k]]);
        }
        return out;
    }

    /// Raw tick days of one stock, in date order.
    std::vector<TickDay> tick_days(std::size_t i) const {
        std::vector<TickDay> out;
        if (synth_) {
            for (int d = 0; d < n_days(); ++d)
                out.push_back(synth_->tick_day(synth_->generate_day(d), synth_index_[i]));
            return out;
        }
        for (const auto& [date, day] : raw_[i]) out.push_back(day);
        return out;
    }

private:
    IntradayGrid grid_;
    CarryPolicy carry_;
    std::vector<std::string> symbols_;
    std::vector<std::string> sectors_;
    std::vector<Date> dates_;
    std::vector<std::string> inputs_;
    std::optional<MarketSynthesizer> synth_;
    std::vector<std::size_t> synth_index_;
    std::vector<std::map<Date, TickDay>> raw_;
    std::vector<IngestSummary> ingest_;
};

/// Ordered pairs (i, j) whose individual curves are written.
inline std::vector<std::pair<std::size_t, std::size_t>> selected_pairs(const RunConfig& cfg,
                                                                       const MarketData& m) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (cfg.pair_outputs == "all") {
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j) out.emplace_back(i, j);
    } else if (cfg.pair_outputs == "list") {
        for (const auto& [a, b] : cfg.pairs) out.emplace_back(m.index_of(a), m.index_of(b));
    }
    return out;
}

/// Canonical configuration without execution-only settings (output
/// directory, worker count), so artifacts do not depend on them.
inline Json reproducible_config(const RunConfig& cfg) {
    Json j = config_to_json(cfg);
    j.erase("output_dir");
    j.erase("jobs");
    return j;
}

struct PipelineResult {
    Json manifest;
    bool complete = false;
};

/// Executes the configured stages. Returns the manifest, which is also
/// written to `<output_dir>/manifest.json`. A failing stage is recorded in
/// the manifest and its error rethrown.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    const fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);

    const Json repro = reproducible_config(cfg);
    const std::string config_text = dump_json(repro);

    Json manifest;
    manifest["version"] = kVersion;
    manifest["config_sha256"] = sha256_hex(config_text);
    manifest["inputs"] = Json::array();
    manifest["stages"] = Json::array();
    std::vector<fs::path> outputs;
    auto emit = [&](const fs::path& rel, const std::string& content) {
        write_text_file(out_dir / rel, content);
        outputs.push_back(rel);
    };
    auto finish = [&](bool complete) {
        std::sort(outputs.begin(), outputs.end());
        Json files = Json::array();
        for (const auto& rel : outputs)
            files.push_back({{"path", rel.generic_string()}, {"sha256", sha256_file(out_dir / rel)}});
        manifest["outputs"] = files;
        manifest["complete"] = complete;
        write_text_file(out_dir / "manifest.json", dump_json(manifest));
        return PipelineResult{manifest, complete};
    };
    auto record = [&](const std::string& stage, const std::string& status) {
        manifest["stages"].push_back({{"name", stage}, {"status", status}});
    };

    emit("config.json", config_text);

    std::optional<MarketData> market;
    try {
        market = MarketData::open(cfg);
    } catch (const std::exception& e) {
        record("load", std::string("failed: ") + e.what());
        finish(false);
        throw;
    }
    const MarketData& m = *market;
    {
        Json inputs = Json::array();
        for (const auto& p : m.input_files())
            inputs.push_back({{"path", fs::path(p).generic_string()}, {"sha256", sha256_file(p)}});
        manifest["inputs"] = inputs;
    }
    record("load", "ok");

    if (const auto* synth = m.synthesizer()) emit("synth/ground_truth.json", dump_json(ground_truth_json(*synth, cfg.curve_lags)));
    if (!m.ingest_summaries().empty()) {
        Json rep = Json::array();
        for (const auto& s : m.ingest_summaries()) {
            auto report = [](const ParseReport& r) {
                return Json{{"rows_read", r.rows_read},         {"rows_accepted", r.rows_accepted},
                            {"malformed", r.malformed},         {"crossed_quotes", r.crossed_quotes},
                            {"non_monotone", r.non_monotone},   {"outside_session", r.outside_session}};
            };
            rep.push_back({{"symbol", s.symbol},
                           {"trades", report(s.trades)},
                           {"quotes", report(s.quotes)},
                           {"days", s.days},
                           {"trading_days", s.trading_days}});
        }
        emit("ingest/report.json", dump_json(rep));
    }

    const bool need_response = cfg.has_stage("respond") || cfg.has_stage("noise") ||
                               cfg.has_stage("matrix") || cfg.has_stage("average") ||
                               cfg.has_stage("rank");
    const bool need_correlator =
        cfg.has_stage("correlate") || cfg.has_stage("average") || cfg.has_stage("fit");
    const bool need_curves = cfg.has_stage("respond") || cfg.has_stage("correlate") ||
                             cfg.has_stage("noise") || cfg.has_stage("average") || cfg.has_stage("fit");
    std::vector<int> lags;
    if (need_curves) lags = merge_lags(lags, cfg.curve_lags);
    if (cfg.has_stage("matrix")) lags = merge_lags(lags, cfg.matrix_lags);
    if (cfg.has_stage("rank")) lags = merge_lags(lags, cfg.rank_lags);

    // Per stock-day sign counts, filled by the day loader.
    struct DayCounts {
        bool present = false;
        bool trading = false;
        SignCounts counts;
    };
    std::vector<std::vector<DayCounts>> sign_counts(static_cast<std::size_t>(m.n_days()),
                                                    std::vector<DayCounts>(m.size()));
    auto loader = [&](int d, std::vector<StockDay>& storage, std::vector<const StockDay*>& view) {
        m.load_day(d, storage, view);
        for (std::size_t i = 0; i < view.size(); ++i) {
            if (!view[i]) continue;
            sign_counts[static_cast<std::size_t>(d)][i] = {true, view[i]->trading_day,
                                                            count_signs(view[i]->signs)};
        }
    };

    std::optional<MarketEngine> engine;
    try {
        if (!lags.empty() && (need_response || need_correlator)) {
            engine.emplace(m.symbols(), lags, cfg.grid.slots(),
                           EngineOptions{cfg.policy, need_response, need_correlator});
            engine->run(m.n_days(), loader, cfg.jobs);
        } else if (cfg.has_stage("signs")) {
            std::vector<StockDay> storage;
            std::vector<const StockDay*> view;
            for (int d = 0; d < m.n_days(); ++d) loader(d, storage, view);
        }
    } catch (const std::exception& e) {
        record("compute", std::string("failed: ") + e.what());
        finish(false);
        throw;
    }
    record("compute", "ok");

    std::optional<PairCurves> response, correlator;
    if (engine && need_response) response = engine->response();
    if (engine && need_correlator) correlator = engine->correlator();
    const auto pairs = selected_pairs(cfg, m);
    auto pair_name = [&](std::size_t i, std::size_t j) {
        return m.symbols()[i] + "__" + m.symbols()[j] + ".csv";
    };

    auto stage = [&](const std::string& name, auto&& body) {
        if (!cfg.has_stage(name)) return;
        try {
            body();
            record(name, "ok");
        } catch (const std::exception& e) {
            record(name, std::string("failed: ") + e.what());
            finish(false);
            throw;
        }
    };

    stage("signs", [&] {
        std::string csv = "symbol,date,trading_day,buy_seconds,sell_seconds,zero_seconds\n";
        for (std::size_t i = 0; i < m.size(); ++i)
            for (int d = 0; d < m.n_days(); ++d) {
                const auto& c = sign_counts[static_cast<std::size_t>(d)][i];
                if (!c.present) continue;
                csv += m.symbols()[i] + "," + format_date(m.dates()[static_cast<std::size_t>(d)]) + "," +
                       (c.trading ? "1" : "0") + "," + std::to_string(c.counts.buy_seconds) + "," +
                       std::to_string(c.counts.sell_seconds) + "," +
                       std::to_string(c.counts.zero_seconds) + "\n";
            }
        emit("signs/summary.csv", csv);
    });

    std::optional<PairCurves> resp_curves, corr_curves;
    if (response && need_curves) resp_curves = select_lags(*response, cfg.curve_lags);
    if (correlator && need_curves) corr_curves = select_lags(*correlator, cfg.curve_lags);

    stage("respond", [&] {
        for (auto [i, j] : pairs) emit(fs::path("pairs/response") / pair_name(i, j), lag_curve_csv(resp_curves->curve(i, j)));
    });
    stage("correlate", [&] {
        for (auto [i, j] : pairs)
            emit(fs::path("pairs/correlator") / pair_name(i, j), lag_curve_csv(corr_curves->curve(i, j)));
    });
    stage("noise", [&] {
        const auto noise = select_lags(engine->response_noise(), cfg.curve_lags);
        for (auto [i, j] : pairs) emit(fs::path("pairs/noise") / pair_name(i, j), lag_curve_csv(noise.curve(i, j)));
    });
    stage("matrix", [&] {
        for (int tau : cfg.matrix_lags) {
            const auto mat = market_response_matrix(*response, m.sectors(), tau);
            const fs::path stem = fs::path("matrix") / ("response_tau" + std::to_string(tau));
            emit(stem.string() + ".csv", matrix_csv(mat));
            emit(stem.string() + ".json", dump_json(matrix_sidecar(mat)));
        }
    });
    stage("average", [&] {
        emit("averages/market_response.csv", lag_curve_csv(market_average(*resp_curves)));
        emit("averages/market_correlator.csv", lag_curve_csv(market_average(*corr_curves)));
        if (m.size() > 1)
            for (std::size_t s = 0; s < m.size(); ++s) {
                const auto pool = market_pool(m.size(), s);
                emit(fs::path("averages/passive") / (m.symbols()[s] + ".csv"),
                     lag_curve_csv(passive_average(*resp_curves, s, pool)));
                emit(fs::path("averages/active") / (m.symbols()[s] + ".csv"),
                     lag_curve_csv(active_average(*resp_curves, s, pool)));
            }
    });
    stage("rank", [&] {
        const auto pc = select_lags(*response, cfg.rank_lags);
        const auto primary = static_cast<std::size_t>(
            std::find(cfg.rank_lags.begin(), cfg.rank_lags.end(), cfg.primary_lag) - cfg.rank_lags.begin());
        if (m.size() < 2) throw UsageError("ranking needs at least two stocks");
        for (auto mode : {InfluenceMode::passive, InfluenceMode::active}) {
            const auto entries = influence_entries(pc, mode, cfg.rank_lags);
            const auto ranked = rank_by_response(entries, primary, cfg.rank_k);
            emit(mode == InfluenceMode::passive ? "rank/passive.csv" : "rank/active.csv",
                 ranking_csv(ranked, cfg.rank_lags));
        }
    });
    stage("fit", [&] {
        auto fit_json = [&](const LagCurve& c) {
            try {
                return fit_to_json(fit_power_law(c, cfg.fit));
            } catch (const NumericError& e) {
                return Json{{"error", e.what()}};
            }
        };
        if (m.size() > 1) emit("fits/market_correlator.json", dump_json(fit_json(market_average(*corr_curves))));
        for (auto [i, j] : pairs) {
            if (i == j) continue;
            std::string name = pair_name(i, j);
            name.replace(name.size() - 4, 4, ".json");
            emit(fs::path("fits/correlator") / name, dump_json(fit_json(corr_curves->curve(i, j))));
        }
    });
    return finish(true);
}

}  // namespace crossimpact
