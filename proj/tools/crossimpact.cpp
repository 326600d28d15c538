// crossimpact command-line tool.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "crossimpact/calibration.hpp"
#include "crossimpact/config.hpp"
#include "crossimpact/fitting.hpp"
#include "crossimpact/ingest.hpp"
#include "crossimpact/io.hpp"
#include "crossimpact/market_engine.hpp"
#include "crossimpact/pipeline.hpp"
#include "crossimpact/response.hpp"
#include "crossimpact/series.hpp"
#include "crossimpact/synth.hpp"

namespace ci = crossimpact;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config;
    std::string out;
    int jobs = 0;
    std::optional<std::uint64_t> seed;
};

/// Relative paths inside a config file are taken relative to that file.
std::string rebase(const std::string& path, const fs::path& base) {
    if (path.empty() || path == "builtin" || fs::path(path).is_absolute()) return path;
    return (base / path).lexically_normal().string();
}

ci::RunConfig load_run_config(const Globals& g) {
    ci::RunConfig cfg;
    if (!g.config.empty()) {
        ci::Json j = ci::read_json_file(g.config);
        // A bare synthetic market specification is accepted as well.
        if (j.contains("n_stocks") || j.contains("stocks") || j.contains("sign_model"))
            j = ci::Json{{"synth", j}};
        cfg = ci::config_from_json(j);
        const fs::path base = fs::path(g.config).parent_path();
        if (cfg.data) {
            cfg.data->trades = rebase(cfg.data->trades, base);
            cfg.data->quotes = rebase(cfg.data->quotes, base);
        }
        cfg.roster = rebase(cfg.roster, base);
        cfg.calibration = rebase(cfg.calibration, base);
    }
    if (!g.out.empty()) cfg.output_dir = g.out;
    if (g.jobs > 0) cfg.jobs = g.jobs;
    if (g.seed && cfg.synth) cfg.synth->seed = *g.seed;
    return cfg;
}

std::string out_dir(const Globals& g) { return g.out.empty() ? "out" : g.out; }

std::vector<int> parse_lag_option(const std::string& s) {
    if (s == "log" || s == "dense" || s == "matrix") return ci::lags_from_json(ci::Json(s));
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto v = ci::detail::parse_int(item);
        if (!v) throw ci::UsageError("bad lag list: " + s);
        out.push_back(static_cast<int>(*v));
    }
    ci::validate_lags(out);
    return out;
}

ci::AveragingPolicy parse_policy(const std::string& s) {
    if (s == "nonzero_sign") return ci::AveragingPolicy::nonzero_sign;
    if (s == "all_seconds") return ci::AveragingPolicy::all_seconds;
    throw ci::UsageError("unknown averaging policy: " + s);
}

std::vector<ci::TickDay> read_ticks(const std::string& path, const ci::SchemaDescriptor& schema,
                                    ci::TickKind kind, const std::string& symbol,
                                    ci::ParseReport* report = nullptr) {
    std::ifstream in(path);
    if (!in) throw ci::DataError("missing input: " + path);
    auto r = ci::parse_tick_file(in, schema, kind, symbol);
    if (report) *report = r.report;
    return std::move(r.days);
}

ci::Json report_json(const ci::ParseReport& r) {
    return {{"rows_read", r.rows_read},       {"rows_accepted", r.rows_accepted},
            {"malformed", r.malformed},       {"crossed_quotes", r.crossed_quotes},
            {"non_monotone", r.non_monotone}, {"outside_session", r.outside_session}};
}

/// All ordered-pair response (or correlator) curves of the configured market.
ci::PairCurves pair_curves(const ci::MarketData& market, const ci::RunConfig& cfg,
                           const std::vector<int>& lags, bool correlator) {
    ci::MarketEngine engine(market.symbols(), lags, cfg.grid.slots(),
                            ci::EngineOptions{cfg.policy, !correlator, correlator});
    engine.run(
        market.n_days(),
        [&](int d, std::vector<ci::StockDay>& storage, std::vector<const ci::StockDay*>& view) {
            market.load_day(d, storage, view);
        },
        cfg.jobs);
    return correlator ? engine.correlator() : engine.response();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-response analysis of trades and quotes data"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "override the synthetic market seed");

    // ingest
    std::string trades_path, quotes_path, symbol;
    auto* ingest = app.add_subcommand("ingest", "validate and normalize one symbol's trades and quotes");
    ingest->add_option("--trades", trades_path, "trades file")->required();
    ingest->add_option("--quotes", quotes_path, "quotes file")->required();
    ingest->add_option("--symbol", symbol, "symbol")->required();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic market as tick files");

    // calibrate
    std::uint64_t cal_samples = 4'000'000;
    std::uint64_t cal_seed = 20080101;
    auto* calibrate = app.add_subcommand("calibrate", "regenerate the latent-to-sign calibration table");
    calibrate->add_option("--samples", cal_samples, "normal pairs per table");
    calibrate->add_option("--table-seed", cal_seed, "generator seed for the table");

    // signs / midpoints
    auto* signs = app.add_subcommand("signs", "per-second trade signs of one symbol");
    signs->add_option("--trades", trades_path, "trades file")->required();
    signs->add_option("--symbol", symbol, "symbol")->required();
    auto* mids = app.add_subcommand("midpoints", "per-second midpoints of one symbol");
    mids->add_option("--quotes", quotes_path, "quotes file")->required();
    mids->add_option("--symbol", symbol, "symbol")->required();

    // pair statistics
    std::string pair_spec, pi, pj, lag_spec = "log", policy_name;
    auto add_pair = [&](CLI::App* sub) {
        sub->add_option("--pair", pair_spec, "I,J: stock i (price / lagged sign), stock j (trade sign)");
        sub->add_option("--i", pi, "stock i");
        sub->add_option("--j", pj, "stock j");
        sub->add_option("--lags", lag_spec, "log, dense, matrix or a comma list");
        sub->add_option("--policy", policy_name, "nonzero_sign or all_seconds");
        sub->add_option("--trades", trades_path, "trades file pattern with {symbol}");
        sub->add_option("--quotes", quotes_path, "quotes file pattern with {symbol}");
    };
    auto* respond = app.add_subcommand("respond", "response function R_ij(tau)");
    auto* correlate = app.add_subcommand("correlate", "trade sign correlator Theta_ij(tau)");
    auto* noise = app.add_subcommand("noise", "response noise from odd and even days");
    for (auto* sub : {respond, correlate, noise}) add_pair(sub);

    // market-wide stages
    std::string matrix_taus;
    std::size_t rank_k = 0;
    auto* matrix = app.add_subcommand("matrix", "normalized market response matrices");
    matrix->add_option("--tau", matrix_taus, "comma list of lags");
    std::string mode, stock, pool = "market", rank_lags, curve_kind = "response";
    auto* average = app.add_subcommand("average", "market, passive and active averages");
    average->add_option("--mode", mode, "passive, active or market; all when omitted")
        ->check(CLI::IsMember({"passive", "active", "market"}));
    average->add_option("--stock", stock, "fixed stock for passive and active averages");
    average->add_option("--pool", pool, "market or sector:<name>");
    average->add_option("--kind", curve_kind, "response or correlator")
        ->check(CLI::IsMember({"response", "correlator"}));
    auto* rank = app.add_subcommand("rank", "influence rankings");
    rank->add_option("--mode", mode, "passive or active; both when omitted")
        ->check(CLI::IsMember({"passive", "active"}));
    rank->add_option("--k", rank_k, "entries per ranking");
    rank->add_option("--lags", rank_lags, "comma list of lags reported per stock");

    // fit
    std::string curve_path;
    double min_tau = 0.0, max_tau = 0.0;
    auto* fit = app.add_subcommand("fit", "power-law fit of a lag curve");
    fit->add_option("--curve", curve_path, "CSV with tau,value[,count]")->required();
    fit->add_option("--min-tau", min_tau, "ignore lags below");
    fit->add_option("--max-tau", max_tau, "ignore lags above");

    auto* run = app.add_subcommand("run", "full pipeline");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*ingest) {
            ci::SchemaDescriptor schema;
            if (!g.config.empty()) {
                auto cfg = load_run_config(g);
                if (cfg.data) schema = cfg.data->schema;
            }
            ci::ParseReport tr, qr;
            auto tdays = read_ticks(trades_path, schema, ci::TickKind::trades, symbol, &tr);
            auto qdays = read_ticks(quotes_path, schema, ci::TickKind::quotes, symbol, &qr);
            auto days = ci::merge_trades_quotes(std::move(tdays), std::move(qdays));
            const fs::path dir = out_dir(g);
            std::ostringstream t, q;
            ci::write_tick_file(t, days, schema, ci::TickKind::trades);
            ci::write_tick_file(q, days, schema, ci::TickKind::quotes);
            ci::write_text_file(dir / "trades" / (symbol + ".csv"), t.str());
            ci::write_text_file(dir / "quotes" / (symbol + ".csv"), q.str());
            ci::Json dates = ci::Json::array();
            for (const auto& d : days)
                dates.push_back({{"date", ci::format_date(d.date)}, {"trading_day", d.is_trading_day()},
                                 {"trades", d.trades.size()}, {"quotes", d.quotes.size()}});
            ci::write_text_file(dir / ("ingest_" + symbol + ".json"),
                                ci::dump_json({{"symbol", symbol},
                                               {"trades", report_json(tr)},
                                               {"quotes", report_json(qr)},
                                               {"days", dates}}));
            std::cout << symbol << ": " << days.size() << " days, " << tr.rejected_rows() + qr.rejected_rows()
                      << " rejected rows\n";
            return 0;
        }

        if (*synth) {
            auto cfg = load_run_config(g);
            if (!cfg.synth) throw ci::UsageError("synth needs a config with a synthetic market");
            std::optional<ci::SignCalibration> cal;
            if (!cfg.synth->targets.empty()) cal = ci::SignCalibration::load(cfg.calibration_path());
            ci::MarketSynthesizer gen(*cfg.synth, cal ? &*cal : nullptr);
            const fs::path dir = out_dir(g);
            const auto& spec = gen.spec();
            const ci::SchemaDescriptor schema;
            std::vector<std::ostringstream> t(spec.n_stocks()), q(spec.n_stocks());
            for (std::size_t i = 0; i < spec.n_stocks(); ++i) {
                std::vector<ci::TickDay> none;
                ci::write_tick_file(t[i], none, schema, ci::TickKind::trades);
                ci::write_tick_file(q[i], none, schema, ci::TickKind::quotes);
            }
            ci::SchemaDescriptor body = schema;
            body.header = false;
            for (int d = 0; d < spec.n_days; ++d) {
                const auto day = gen.generate_day(d);
                for (std::size_t i = 0; i < spec.n_stocks(); ++i) {
                    const std::vector<ci::TickDay> one{gen.tick_day(day, i)};
                    ci::write_tick_file(t[i], one, body, ci::TickKind::trades);
                    ci::write_tick_file(q[i], one, body, ci::TickKind::quotes);
                }
            }
            ci::Json universe = ci::Json::array();
            for (std::size_t i = 0; i < spec.n_stocks(); ++i) {
                ci::write_text_file(dir / "trades" / (spec.stocks[i].symbol + ".csv"), t[i].str());
                ci::write_text_file(dir / "quotes" / (spec.stocks[i].symbol + ".csv"), q[i].str());
                universe.push_back({{"symbol", spec.stocks[i].symbol}, {"sector", spec.stocks[i].sector}});
            }
            ci::write_text_file(dir / "ground_truth.json",
                                ci::dump_json(ci::ground_truth_json(gen, cfg.curve_lags)));
            ci::Json run_cfg = ci::config_to_json(cfg);
            run_cfg.erase("synth");
            run_cfg.erase("output_dir");
            run_cfg.erase("jobs");
            run_cfg["data"] = {{"trades", "trades/{symbol}.csv"},
                               {"quotes", "quotes/{symbol}.csv"},
                               {"schema", ci::schema_to_json(schema)}};
            run_cfg["universe"] = universe;
            ci::write_text_file(dir / "config.json", ci::dump_json(run_cfg));
            std::cout << "wrote " << spec.n_stocks() << " stocks x " << spec.n_days << " days to "
                      << dir.string() << "\n";
            return 0;
        }

        if (*calibrate) {
            auto table = ci::calibrate_sign_mapping(ci::default_calibration_p_grid(),
                                                    ci::default_calibration_r_grid(), cal_samples, cal_seed);
            const fs::path path = fs::path(out_dir(g)) / "sign_calibration.json";
            ci::write_text_file(path, table.to_json().dump(1) + "\n");
            std::cout << "wrote " << path.string() << "\n";
            return 0;
        }

        if (*signs || *mids) {
            ci::RunConfig cfg;
            if (!g.config.empty()) cfg = load_run_config(g);
            const ci::SchemaDescriptor schema = cfg.data ? cfg.data->schema : ci::SchemaDescriptor{};
            const fs::path dir = out_dir(g);
            if (*signs) {
                for (const auto& raw : read_ticks(trades_path, schema, ci::TickKind::trades, symbol)) {
                    const auto day = ci::clip_to_grid(raw, cfg.grid);
                    const auto trade_signs = ci::classify_trade_signs(day.trades, cfg.carry);
                    auto series = ci::aggregate_second_signs(trade_signs, day.trades, cfg.grid);
                    series.symbol = symbol;
                    series.date = raw.date;
                    const std::string stem = symbol + "_" + ci::format_date(raw.date);
                    ci::write_text_file(dir / "signs" / (stem + ".csv"), ci::signs_csv(series, cfg.grid));
                    ci::write_text_file(dir / "signs" / (stem + ".json"),
                                        ci::dump_json(ci::signs_sidecar(series, trade_signs.undefined_prefix)));
                }
            } else {
                for (const auto& raw : read_ticks(quotes_path, schema, ci::TickKind::quotes, symbol)) {
                    const auto m = ci::midpoint_series(ci::clip_to_grid(raw, cfg.grid), cfg.grid);
                    ci::write_text_file(dir / "midpoints" / (symbol + "_" + ci::format_date(raw.date) + ".csv"),
                                        ci::midpoints_csv(m, cfg.grid));
                }
            }
            return 0;
        }

        if (*respond || *correlate || *noise) {
            if (!pair_spec.empty()) {
                const auto comma = pair_spec.find(',');
                if (comma == std::string::npos) throw ci::UsageError("--pair takes I,J");
                pi = pair_spec.substr(0, comma);
                pj = pair_spec.substr(comma + 1);
            }
            if (pi.empty() || pj.empty()) throw ci::UsageError("give --pair I,J (or --i and --j)");
            ci::RunConfig cfg;
            if (!g.config.empty()) cfg = load_run_config(g);
            if (!trades_path.empty() || !quotes_path.empty()) {
                if (trades_path.empty() || quotes_path.empty())
                    throw ci::UsageError("--trades and --quotes go together");
                ci::DataPaths p;
                if (cfg.data) p.schema = cfg.data->schema;
                p.trades = trades_path;
                p.quotes = quotes_path;
                cfg.data = p;
                cfg.synth.reset();
            }
            cfg.universe.clear();
            cfg.universe.push_back({pi, ""});
            if (pj != pi) cfg.universe.push_back({pj, ""});
            cfg.validate();
            const auto lags = parse_lag_option(lag_spec);
            const auto policy = policy_name.empty() ? cfg.policy : parse_policy(policy_name);
            const auto market = ci::MarketData::open(cfg);
            std::vector<std::size_t> which{0, pj == pi ? 0u : 1u};
            const auto series = market.series(which);
            ci::LagCurve curve;
            std::string kind;
            if (*respond) {
                curve = ci::cross_response(series[0], series[1], lags, policy);
                kind = "response";
            } else if (*correlate) {
                curve = ci::sign_correlator(series[0], series[1], lags, policy);
                kind = "correlator";
            } else {
                curve = ci::response_noise(series[0], series[1], lags, policy);
                kind = "noise";
            }
            const fs::path path = fs::path(out_dir(g)) / (kind + "_" + pi + "__" + pj + ".csv");
            ci::write_text_file(path, ci::lag_curve_csv(curve));
            if (curve.no_common_days) std::cerr << "warning: no common trading days\n";
            std::cout << "wrote " << path.string() << "\n";
            return 0;
        }

        if ((*average || *rank) && !mode.empty() && !(*average && mode == "market")) {
            auto cfg = load_run_config(g);
            cfg.validate();
            const auto market = ci::MarketData::open(cfg);
            const auto& syms = market.symbols();
            const fs::path dir = out_dir(g);
            if (*rank) {
                if (!rank_lags.empty()) cfg.rank_lags = parse_lag_option(rank_lags);
                if (rank_k > 0) cfg.rank_k = rank_k;
                if (market.size() < 2) throw ci::UsageError("ranking needs at least two stocks");
                auto it = std::find(cfg.rank_lags.begin(), cfg.rank_lags.end(), cfg.primary_lag);
                if (it == cfg.rank_lags.end()) it = cfg.rank_lags.end() - 1;  // largest lag orders
                const auto pc = pair_curves(market, cfg, cfg.rank_lags, false);
                const auto m = mode == "passive" ? ci::InfluenceMode::passive : ci::InfluenceMode::active;
                const auto ranked = ci::rank_by_response(ci::influence_entries(pc, m, cfg.rank_lags),
                                                         static_cast<std::size_t>(it - cfg.rank_lags.begin()),
                                                         cfg.rank_k);
                const fs::path path = dir / "rank" / (mode + ".csv");
                ci::write_text_file(path, ci::ranking_csv(ranked, cfg.rank_lags));
                std::cout << "wrote " << path.string() << "\n";
                return 0;
            }
            if (stock.empty()) throw ci::UsageError("--stock is required for passive and active averages");
            const auto fixed = market.index_of(stock);
            std::vector<std::size_t> members;
            if (pool == "market") {
                members = ci::market_pool(market.size(), fixed);
            } else if (pool.rfind("sector:", 0) == 0) {
                members = ci::sector_pool(market.sectors(), pool.substr(7), fixed);
            } else {
                throw ci::UsageError("--pool must be market or sector:<name>");
            }
            const auto pc = pair_curves(market, cfg, cfg.curve_lags, curve_kind == "correlator");
            const auto curve = mode == "passive" ? ci::passive_average(pc, fixed, members, pool)
                                                 : ci::active_average(pc, fixed, members, pool);
            std::string tag = pool;
            std::replace(tag.begin(), tag.end(), ':', '_');
            const fs::path path = dir / (curve_kind + "_" + mode + "_" + syms[fixed] + "_" + tag + ".csv");
            ci::write_text_file(path, ci::lag_curve_csv(curve));
            std::cout << "wrote " << path.string() << "\n";
            return 0;
        }

        if (*matrix || *average || *rank || *run) {
            auto cfg = load_run_config(g);
            if (*matrix) {
                cfg.stages = {"matrix"};
                if (!matrix_taus.empty()) cfg.matrix_lags = parse_lag_option(matrix_taus);
            } else if (*average) {
                cfg.stages = {"average"};
            } else if (*rank) {
                cfg.stages = {"rank"};
                if (rank_k > 0) cfg.rank_k = rank_k;
                if (!rank_lags.empty()) {
                    cfg.rank_lags = parse_lag_option(rank_lags);
                    if (std::find(cfg.rank_lags.begin(), cfg.rank_lags.end(), cfg.primary_lag) ==
                        cfg.rank_lags.end())
                        cfg.primary_lag = cfg.rank_lags.back();
                }
            }
            const auto result = ci::run_pipeline(cfg);
            std::cout << "wrote " << result.manifest["outputs"].size() << " artifacts to " << cfg.output_dir
                      << "\n";
            return 0;
        }

        if (*fit) {
            std::ifstream in(curve_path);
            if (!in) throw ci::DataError("missing input: " + curve_path);
            auto curve = ci::parse_lag_curve_csv(in);
            ci::FitBounds bounds;
            if (!g.config.empty()) bounds = load_run_config(g).fit;
            std::vector<double> tau, y;
            for (std::size_t k = 0; k < curve.size(); ++k) {
                if (!curve.defined(k)) continue;
                if (min_tau > 0 && curve.lags[k] < min_tau) continue;
                if (max_tau > 0 && curve.lags[k] > max_tau) continue;
                tau.push_back(curve.lags[k]);
                y.push_back(curve.values[k]);
            }
            const auto result = ci::fit_power_law(tau, y, bounds);
            const std::string text = ci::dump_json(ci::fit_to_json(result));
            if (!g.out.empty()) ci::write_text_file(fs::path(g.out) / "fit.json", text);
            std::cout << text;
            return 0;
        }
    } catch (const ci::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ci::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
