#pragma once

// Run configuration and synthetic market specification, with a canonical
// JSON form: to_json(from_json(j)) is a fixed point and from_json(to_json(c))
// == c.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "crossimpact/calibration.hpp"
#include "crossimpact/calendar.hpp"
#include "crossimpact/errors.hpp"
#include "crossimpact/fitting.hpp"
#include "crossimpact/ingest.hpp"
#include "crossimpact/lag_grid.hpp"
#include "crossimpact/response.hpp"
#include "crossimpact/signing.hpp"
#include "crossimpact/synth.hpp"

namespace crossimpact {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Roster

struct RosterEntry {
    std::string symbol;
    std::string company;
    std::string sector;
    double amc = 0.0;  // averaged market capitalization

    friend bool operator==(const RosterEntry&, const RosterEntry&) = default;
};

inline std::string default_roster_path() {
#ifdef CROSSIMPACT_DATA_DIR
    return std::string(CROSSIMPACT_DATA_DIR) + "/roster_2008.csv";
#else
    return "data/roster_2008.csv";
#endif
}

/// Reads `symbol,company,sector,amc` rows.
inline std::vector<RosterEntry> load_roster(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open roster: " + path);
    std::vector<RosterEntry> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        auto f = detail::split_fields(line, ',');
        if (f.size() < 4) throw DataError("malformed roster row: " + line);
        auto amc = detail::parse_double(f[3]);
        if (!amc) throw DataError("malformed roster row: " + line);
        out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2]), *amc});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Small JSON helpers

namespace detail {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("config key '") + key + "': " + e.what());
    }
}

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* where) {
    if (!j.is_object()) throw UsageError(std::string(where) + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return it.key() == a; }) == allowed.end())
            throw UsageError(std::string("unknown key '") + it.key() + "' in " + where);
    }
}

inline Date date_from_json(const Json& j, const char* key, Date fallback) {
    auto s = get_or<std::string>(j, key, "");
    if (s.empty()) return fallback;
    auto d = parse_date(s);
    if (!d) throw UsageError(std::string("config key '") + key + "': bad date " + s);
    return *d;
}

inline SecondOfDay time_from_json(const Json& j, const char* key, SecondOfDay fallback) {
    auto s = get_or<std::string>(j, key, "");
    if (s.empty()) return fallback;
    auto t = parse_time(s);
    if (!t) throw UsageError(std::string("config key '") + key + "': bad time " + s);
    return *t;
}

inline std::size_t symbol_index(const std::vector<SynthStock>& stocks, const std::string& symbol) {
    for (std::size_t k = 0; k < stocks.size(); ++k)
        if (stocks[k].symbol == symbol) return k;
    throw UsageError("synth: unknown stock symbol " + symbol);
}

}  // namespace detail

inline Json grid_to_json(const IntradayGrid& g) {
    return {{"open", format_time(g.open_second)}, {"close", format_time(g.close_second)}};
}

inline IntradayGrid grid_from_json(const Json& j) {
    detail::check_keys(j, {"open", "close"}, "grid");
    IntradayGrid g;
    g.open_second = detail::time_from_json(j, "open", g.open_second);
    g.close_second = detail::time_from_json(j, "close", g.close_second);
    g.validate();
    return g;
}

// ---------------------------------------------------------------------------
// Impact kernel and synthetic market

inline Json kernel_to_json(const ImpactKernel& k) {
    Json j{{"shape", to_string(k.shape)}};
    switch (k.shape) {
        case ImpactKernel::Shape::exponential: j["decay"] = k.decay; break;
        case ImpactKernel::Shape::rise_decay:
            j["rise"] = k.rise;
            j["decay"] = k.decay;
            break;
        case ImpactKernel::Shape::custom: {
            Json terms = Json::array();
            for (const auto& t : k.terms) terms.push_back({{"weight", t.weight}, {"decay", t.decay}});
            j["terms"] = terms;
            break;
        }
        default: break;
    }
    return j;
}

inline ImpactKernel kernel_from_json(const Json& j) {
    detail::check_keys(j, {"shape", "rise", "decay", "terms"}, "kernel");
    const auto shape = detail::get_or<std::string>(j, "shape", "none");
    auto number = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end()) throw UsageError(std::string("kernel '") + shape + "' needs '" + key + "'");
        if (it->is_null()) return std::numeric_limits<double>::quiet_NaN();
        return it->get<double>();
    };
    if (shape == "none") return ImpactKernel::none();
    if (shape == "step") return ImpactKernel::step();
    if (shape == "exponential") return ImpactKernel::exponential(number("decay"));
    if (shape == "rise_decay") return ImpactKernel::rise_decay(number("rise"), number("decay"));
    if (shape == "custom") {
        std::vector<ExpTerm> terms;
        for (const auto& t : j.at("terms")) {
            auto w = t.at("weight");
            auto q = t.at("decay");
            terms.push_back({w.is_null() ? std::numeric_limits<double>::quiet_NaN() : w.get<double>(),
                             q.is_null() ? std::numeric_limits<double>::quiet_NaN() : q.get<double>()});
        }
        return ImpactKernel::custom(std::move(terms));
    }
    throw UsageError("unknown kernel shape: " + shape);
}

inline Json synth_to_json(const SynthSpec& s) {
    Json stocks = Json::array();
    for (const auto& st : s.stocks)
        stocks.push_back({{"symbol", st.symbol},
                          {"sector", st.sector},
                          {"p_trade", st.p_trade},
                          {"p_buy", st.p_buy},
                          {"noise_sigma", st.noise_sigma},
                          {"price0", st.price0}});
    Json sign{{"type", to_string(s.sign_model)}};
    if (s.sign_model == SignModel::latent_factor) {
        Json factors = Json::array();
        for (const auto& f : s.factors)
            factors.push_back({{"tau0", f.tau0}, {"gamma", f.gamma}, {"loadings", f.loadings}});
        Json targets = Json::array();
        for (const auto& t : s.targets)
            targets.push_back({{"i", s.stocks[t.i].symbol},
                               {"j", s.stocks[t.j].symbol},
                               {"theta", t.theta},
                               {"tau0", t.tau0},
                               {"gamma", t.gamma}});
        sign["factors"] = factors;
        sign["targets"] = targets;
    }
    Json impact{{"type", s.impact.empty() && s.kernel.empty() ? "none" : "transient_kernel"}};
    if (!(s.impact.empty() && s.kernel.empty())) {
        impact["kernel"] = kernel_to_json(s.kernel);
        Json links = Json::array();
        for (const auto& l : s.impact)
            links.push_back({{"i", s.stocks[l.i].symbol}, {"j", s.stocks[l.j].symbol}, {"amplitude", l.amplitude}});
        impact["links"] = links;
    }
    return {{"seed", s.seed},
            {"n_days", s.n_days},
            {"first_date", format_date(s.first_date)},
            {"grid", grid_to_json(s.grid)},
            {"half_spread", s.half_spread},
            {"tick", s.tick},
            {"stocks", stocks},
            {"sign_model", sign},
            {"impact_model", impact}};
}

/// Accepts the canonical form plus shorthands: `n_stocks` with shared stock
/// parameters instead of a `stocks` list, loadings keyed by symbol or sector,
/// and "*" as the driven stock of an impact link (every other stock).
inline SynthSpec synth_from_json(const Json& j) {
    detail::check_keys(j,
                       {"seed", "n_days", "first_date", "grid", "half_spread", "tick", "stocks",
                        "n_stocks", "p_trade", "p_buy", "noise_sigma", "sectors", "sign_model",
                        "impact_model"},
                       "synth");
    SynthSpec s;
    s.seed = detail::get_or<std::uint64_t>(j, "seed", s.seed);
    s.n_days = detail::get_or<int>(j, "n_days", s.n_days);
    s.first_date = detail::date_from_json(j, "first_date", s.first_date);
    if (j.contains("grid")) s.grid = grid_from_json(j.at("grid"));
    s.half_spread = detail::get_or<double>(j, "half_spread", s.half_spread);
    s.tick = detail::get_or<double>(j, "tick", s.tick);

    if (j.contains("stocks")) {
        for (const auto& st : j.at("stocks")) {
            detail::check_keys(st, {"symbol", "sector", "p_trade", "p_buy", "noise_sigma", "price0"},
                               "synth stock");
            SynthStock x;
            x.symbol = st.at("symbol").get<std::string>();
            x.sector = detail::get_or<std::string>(st, "sector", "");
            x.p_trade = detail::get_or<double>(st, "p_trade", x.p_trade);
            x.p_buy = detail::get_or<double>(st, "p_buy", x.p_buy);
            x.noise_sigma = detail::get_or<double>(st, "noise_sigma", x.noise_sigma);
            x.price0 = detail::get_or<double>(st, "price0", x.price0);
            s.stocks.push_back(std::move(x));
        }
    } else {
        const auto n = detail::get_or<std::size_t>(j, "n_stocks", 0);
        s.stocks = uniform_stocks(n, detail::get_or<double>(j, "p_trade", 1.0),
                                  detail::get_or<double>(j, "p_buy", 0.5),
                                  detail::get_or<double>(j, "noise_sigma", 1e-4));
        auto sectors = detail::get_or<std::vector<std::string>>(j, "sectors", {});
        if (!sectors.empty())
            for (std::size_t k = 0; k < s.stocks.size(); ++k) s.stocks[k].sector = sectors[k % sectors.size()];
    }
    {
        std::set<std::string> seen;
        for (const auto& st : s.stocks)
            if (!seen.insert(st.symbol).second) throw UsageError("synth: duplicate symbol " + st.symbol);
    }

    const Json sign = j.value("sign_model", Json{{"type", "iid"}});
    detail::check_keys(sign, {"type", "factors", "targets"}, "sign_model");
    const auto type = detail::get_or<std::string>(sign, "type", "iid");
    if (type == "iid") {
        s.sign_model = SignModel::iid;
        if (sign.contains("factors") || sign.contains("targets"))
            throw UsageError("sign_model iid takes no factors or targets");
    } else if (type == "latent_factor") {
        s.sign_model = SignModel::latent_factor;
        for (const auto& f : sign.value("factors", Json::array())) {
            detail::check_keys(f, {"tau0", "gamma", "loadings", "sector_loadings"}, "latent factor");
            LatentFactor lf;
            lf.tau0 = f.at("tau0").get<double>();
            lf.gamma = f.at("gamma").get<double>();
            lf.loadings.assign(s.stocks.size(), 0.0);
            if (f.contains("loadings")) {
                const auto& l = f.at("loadings");
                if (l.is_array()) {
                    lf.loadings = l.get<std::vector<double>>();
                } else {
                    for (auto it = l.begin(); it != l.end(); ++it)
                        lf.loadings[detail::symbol_index(s.stocks, it.key())] = it.value().get<double>();
                }
            }
            if (f.contains("sector_loadings")) {
                const auto& l = f.at("sector_loadings");
                for (auto it = l.begin(); it != l.end(); ++it)
                    for (std::size_t k = 0; k < s.stocks.size(); ++k)
                        if (s.stocks[k].sector == it.key()) lf.loadings[k] = it.value().get<double>();
            }
            s.factors.push_back(std::move(lf));
        }
        for (const auto& t : sign.value("targets", Json::array())) {
            detail::check_keys(t, {"i", "j", "theta", "tau0", "gamma"}, "correlation target");
            s.targets.push_back({detail::symbol_index(s.stocks, t.at("i").get<std::string>()),
                                 detail::symbol_index(s.stocks, t.at("j").get<std::string>()),
                                 t.at("theta").get<double>(), t.at("tau0").get<double>(),
                                 t.at("gamma").get<double>()});
        }
    } else {
        throw UsageError("unknown sign_model type: " + type);
    }

    const Json impact = j.value("impact_model", Json{{"type", "none"}});
    detail::check_keys(impact, {"type", "kernel", "links"}, "impact_model");
    const auto itype = detail::get_or<std::string>(impact, "type", "none");
    if (itype == "transient_kernel") {
        s.kernel = kernel_from_json(impact.value("kernel", Json{{"shape", "none"}}));
        for (const auto& l : impact.value("links", Json::array())) {
            detail::check_keys(l, {"i", "j", "amplitude"}, "impact link");
            const std::size_t jj = detail::symbol_index(s.stocks, l.at("j").get<std::string>());
            const auto& a = l.at("amplitude");
            const double amp = a.is_null() ? std::numeric_limits<double>::quiet_NaN() : a.get<double>();
            const auto target = l.at("i").get<std::string>();
            if (target == "*") {
                for (std::size_t ii = 0; ii < s.stocks.size(); ++ii)
                    if (ii != jj) s.impact.push_back({ii, jj, amp});
            } else {
                s.impact.push_back({detail::symbol_index(s.stocks, target), jj, amp});
            }
        }
    } else if (itype != "none") {
        throw UsageError("unknown impact_model type: " + itype);
    }
    return s;
}

/// Ground-truth record of a generated market: the resolved specification,
/// target correlator curves and the kernel on the given lags.
inline Json ground_truth_json(const MarketSynthesizer& synth, std::span<const int> lags) {
    const auto& s = synth.spec();
    Json targets = Json::array();
    for (const auto& r : synth.resolutions()) {
        Json curve = Json::array();
        for (int tau : lags) curve.push_back({{"tau", tau}, {"value", r.target(tau)}});
        targets.push_back({{"i", s.stocks[r.target.i].symbol},
                           {"j", s.stocks[r.target.j].symbol},
                           {"theta", r.target.theta},
                           {"tau0", r.target.tau0},
                           {"gamma", r.target.gamma},
                           {"latent_correlation", r.latent_correlation},
                           {"achievable_theta", r.achievable_theta},
                           {"curve", curve}});
    }
    Json kernel = kernel_to_json(s.kernel);
    Json terms = Json::array();
    for (const auto& t : s.kernel.terms) terms.push_back({{"weight", t.weight}, {"decay", t.decay}});
    kernel["terms"] = terms;
    if (auto peak = s.kernel.peak_lag()) kernel["peak_lag"] = *peak;
    Json curve = Json::array();
    for (int tau : lags) curve.push_back({{"tau", tau}, {"level", s.kernel.level(tau)}});
    kernel["curve"] = curve;
    Json factors = Json::array();
    for (const auto& f : synth.factors())
        factors.push_back({{"tau0", f.tau0}, {"gamma", f.gamma}, {"loadings", f.loadings}});
    return {{"spec", synth_to_json(s)},
            {"resolved_factors", factors},
            {"targets", targets},
            {"kernel", kernel}};
}

// ---------------------------------------------------------------------------
// Run configuration

struct UniverseEntry {
    std::string symbol;
    std::string sector;

    friend bool operator==(const UniverseEntry&, const UniverseEntry&) = default;
};

/// Per-symbol input files; "{symbol}" in a pattern is replaced by the symbol.
struct DataPaths {
    std::string trades;
    std::string quotes;
    SchemaDescriptor schema;

    std::string trades_for(const std::string& symbol) const { return substitute(trades, symbol); }
    std::string quotes_for(const std::string& symbol) const { return substitute(quotes, symbol); }

    static std::string substitute(std::string pattern, const std::string& symbol) {
        const std::string key = "{symbol}";
        for (auto pos = pattern.find(key); pos != std::string::npos; pos = pattern.find(key))
            pattern.replace(pos, key.size(), symbol);
        return pattern;
    }

    friend bool operator==(const DataPaths&, const DataPaths&) = default;
};

inline const std::vector<std::string>& all_stages() {
    static const std::vector<std::string> s{"signs",   "respond", "correlate", "noise",
                                            "matrix",  "average", "rank",      "fit"};
    return s;
}

struct RunConfig {
    std::optional<DataPaths> data;
    std::optional<SynthSpec> synth;
    std::string roster = "builtin";        // used when `universe` is empty and no synth is given
    std::vector<UniverseEntry> universe;   // empty: roster or synth stocks
    IntradayGrid grid;
    CarryPolicy carry;
    std::vector<int> curve_lags = log_lags();
    std::vector<int> matrix_lags = crossimpact::matrix_lags();
    std::vector<int> rank_lags = crossimpact::matrix_lags();
    int primary_lag = 300;
    std::size_t rank_k = 15;
    AveragingPolicy policy = AveragingPolicy::nonzero_sign;
    std::vector<std::string> stages = all_stages();
    /// Pairs whose individual curves are written: "all", "none", or listed.
    std::string pair_outputs = "all";
    std::vector<std::pair<std::string, std::string>> pairs;
    FitBounds fit;
    std::string calibration = "builtin";
    std::string output_dir = "out";
    int jobs = 1;

    bool has_stage(const std::string& s) const {
        return std::find(stages.begin(), stages.end(), s) != stages.end();
    }

    void validate() const {
        if (data && synth) throw UsageError("config: give either data or synth, not both");
        if (!data && !synth) throw UsageError("config: no input (data or synth) given");
        grid.validate();
        validate_lags(curve_lags);
        validate_lags(matrix_lags);
        validate_lags(rank_lags);
        if (std::find(rank_lags.begin(), rank_lags.end(), primary_lag) == rank_lags.end())
            throw UsageError("config: primary_lag must be one of rank_lags");
        for (const auto& s : stages)
            if (std::find(all_stages().begin(), all_stages().end(), s) == all_stages().end())
                throw UsageError("config: unknown stage " + s);
        if (pair_outputs != "all" && pair_outputs != "none" && pair_outputs != "list")
            throw UsageError("config: pair_outputs must be all, none or list");
        if (jobs < 1) throw UsageError("config: jobs must be at least 1");
        if (synth && synth->grid != grid)
            throw UsageError("config: synth grid must equal the run grid");
    }

    std::string calibration_path() const {
        return calibration == "builtin" ? default_calibration_path() : calibration;
    }
    std::string roster_path() const { return roster == "builtin" ? default_roster_path() : roster; }

    friend bool operator==(const RunConfig& a, const RunConfig& b) {
        auto fb = [](const FitBounds& f) {
            return std::tie(f.tau0_min, f.tau0_max, f.gamma_min, f.gamma_max, f.tau0_points,
                            f.gamma_points, f.refine_seeds, f.max_iterations);
        };
        return a.data == b.data && a.synth == b.synth && a.roster == b.roster &&
               a.universe == b.universe && a.grid == b.grid && a.carry.mode == b.carry.mode &&
               a.carry.carried_sign == b.carry.carried_sign && a.curve_lags == b.curve_lags &&
               a.matrix_lags == b.matrix_lags && a.rank_lags == b.rank_lags &&
               a.primary_lag == b.primary_lag && a.rank_k == b.rank_k && a.policy == b.policy &&
               a.stages == b.stages && a.pair_outputs == b.pair_outputs && a.pairs == b.pairs &&
               fb(a.fit) == fb(b.fit) && a.calibration == b.calibration &&
               a.output_dir == b.output_dir && a.jobs == b.jobs;
    }
};

inline Json schema_to_json(const SchemaDescriptor& s) {
    return {{"delimiter", std::string(1, s.delimiter)},
            {"header", s.header},
            {"trade_columns", s.trade_columns},
            {"quote_columns", s.quote_columns},
            {"positions", s.positions},
            {"session", {{"open", format_time(s.session.open_second)},
                         {"close", format_time(s.session.close_second)}}}};
}

inline SchemaDescriptor schema_from_json(const Json& j) {
    detail::check_keys(j, {"delimiter", "header", "trade_columns", "quote_columns", "positions", "session"},
                       "schema");
    SchemaDescriptor s;
    const auto delim = detail::get_or<std::string>(j, "delimiter", ",");
    if (delim.size() != 1) throw UsageError("schema delimiter must be one character");
    s.delimiter = delim[0];
    s.header = detail::get_or<bool>(j, "header", s.header);
    s.trade_columns = detail::get_or(j, "trade_columns", s.trade_columns);
    s.quote_columns = detail::get_or(j, "quote_columns", s.quote_columns);
    s.positions = detail::get_or(j, "positions", s.positions);
    if (j.contains("session")) {
        const auto& ss = j.at("session");
        detail::check_keys(ss, {"open", "close"}, "session");
        s.session.open_second = detail::time_from_json(ss, "open", s.session.open_second);
        s.session.close_second = detail::time_from_json(ss, "close", s.session.close_second);
    }
    return s;
}

inline Json lags_to_json(const std::vector<int>& lags) { return lags; }

/// Lag grids may be written as an explicit list or as "log", "dense",
/// "matrix".
inline std::vector<int> lags_from_json(const Json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "log") return log_lags();
        if (s == "dense") return dense_lags();
        if (s == "matrix") return matrix_lags();
        throw UsageError("unknown lag grid: " + s);
    }
    auto v = j.get<std::vector<int>>();
    validate_lags(v);
    return v;
}

inline Json config_to_json(const RunConfig& c) {
    Json j;
    if (c.data)
        j["data"] = {{"trades", c.data->trades},
                     {"quotes", c.data->quotes},
                     {"schema", schema_to_json(c.data->schema)}};
    if (c.synth) j["synth"] = synth_to_json(*c.synth);
    j["roster"] = c.roster;
    Json universe = Json::array();
    for (const auto& u : c.universe) universe.push_back({{"symbol", u.symbol}, {"sector", u.sector}});
    j["universe"] = universe;
    j["grid"] = grid_to_json(c.grid);
    j["carry_policy"] = c.carry.mode == CarryPolicy::Mode::none
                            ? Json{{"mode", "none"}}
                            : Json{{"mode", "carry_in"}, {"sign", static_cast<int>(c.carry.carried_sign)}};
    j["lags"] = {{"curves", lags_to_json(c.curve_lags)},
                 {"matrix", lags_to_json(c.matrix_lags)},
                 {"rank", lags_to_json(c.rank_lags)},
                 {"primary", c.primary_lag}};
    j["rank_k"] = c.rank_k;
    j["averaging_policy"] = to_string(c.policy);
    j["stages"] = c.stages;
    Json pairs = Json::array();
    for (const auto& [a, b] : c.pairs) pairs.push_back(Json::array({a, b}));
    j["pair_outputs"] = c.pair_outputs;
    j["pairs"] = pairs;
    j["fit"] = {{"tau0_min", c.fit.tau0_min},       {"tau0_max", c.fit.tau0_max},
                {"gamma_min", c.fit.gamma_min},     {"gamma_max", c.fit.gamma_max},
                {"tau0_points", c.fit.tau0_points}, {"gamma_points", c.fit.gamma_points},
                {"refine_seeds", c.fit.refine_seeds}, {"max_iterations", c.fit.max_iterations}};
    j["calibration"] = c.calibration;
    j["output_dir"] = c.output_dir;
    j["jobs"] = c.jobs;
    return j;
}

inline RunConfig config_from_json(const Json& j) {
    detail::check_keys(j,
                       {"data", "synth", "roster", "universe", "grid", "carry_policy", "lags", "rank_k",
                        "averaging_policy", "stages", "pair_outputs", "pairs", "fit", "calibration",
                        "output_dir", "jobs"},
                       "config");
    RunConfig c;
    try {
        if (j.contains("data")) {
            const auto& d = j.at("data");
            detail::check_keys(d, {"trades", "quotes", "schema"}, "data");
            DataPaths p;
            p.trades = d.at("trades").get<std::string>();
            p.quotes = d.at("quotes").get<std::string>();
            if (d.contains("schema")) p.schema = schema_from_json(d.at("schema"));
            c.data = p;
        }
        if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
        if (j.contains("synth")) {
            Json s = j.at("synth");
            if (!s.contains("grid")) s["grid"] = grid_to_json(c.grid);
            c.synth = synth_from_json(s);
        }
        c.roster = detail::get_or<std::string>(j, "roster", c.roster);
        for (const auto& u : j.value("universe", Json::array()))
            c.universe.push_back({u.at("symbol").get<std::string>(), detail::get_or<std::string>(u, "sector", "")});
        if (j.contains("carry_policy")) {
            const auto& cp = j.at("carry_policy");
            detail::check_keys(cp, {"mode", "sign"}, "carry_policy");
            const auto mode = detail::get_or<std::string>(cp, "mode", "none");
            if (mode == "carry_in") {
                const int s = detail::get_or<int>(cp, "sign", 0);
                if (s < -1 || s > 1) throw UsageError("carry_policy sign must be -1, 0 or 1");
                c.carry = CarryPolicy::carry_in(static_cast<Sign>(s));
            } else if (mode != "none") {
                throw UsageError("unknown carry_policy mode: " + mode);
            }
        }
        if (j.contains("lags")) {
            const auto& l = j.at("lags");
            detail::check_keys(l, {"curves", "matrix", "rank", "primary"}, "lags");
            if (l.contains("curves")) c.curve_lags = lags_from_json(l.at("curves"));
            if (l.contains("matrix")) c.matrix_lags = lags_from_json(l.at("matrix"));
            if (l.contains("rank")) c.rank_lags = lags_from_json(l.at("rank"));
            c.primary_lag = detail::get_or<int>(l, "primary", c.primary_lag);
        }
        c.rank_k = detail::get_or<std::size_t>(j, "rank_k", c.rank_k);
        const auto policy = detail::get_or<std::string>(j, "averaging_policy", "nonzero_sign");
        if (policy == "nonzero_sign") c.policy = AveragingPolicy::nonzero_sign;
        else if (policy == "all_seconds") c.policy = AveragingPolicy::all_seconds;
        else throw UsageError("unknown averaging_policy: " + policy);
        c.stages = detail::get_or(j, "stages", c.stages);
        c.pair_outputs = detail::get_or<std::string>(j, "pair_outputs", c.pair_outputs);
        for (const auto& p : j.value("pairs", Json::array())) {
            if (!p.is_array() || p.size() != 2) throw UsageError("pairs entries must be [i, j]");
            c.pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
        }
        if (!c.pairs.empty() && !j.contains("pair_outputs")) c.pair_outputs = "list";
        if (j.contains("fit")) {
            const auto& f = j.at("fit");
            detail::check_keys(f, {"tau0_min", "tau0_max", "gamma_min", "gamma_max", "tau0_points",
                                   "gamma_points", "refine_seeds", "max_iterations"},
                               "fit");
            c.fit.tau0_min = detail::get_or(f, "tau0_min", c.fit.tau0_min);
            c.fit.tau0_max = detail::get_or(f, "tau0_max", c.fit.tau0_max);
            c.fit.gamma_min = detail::get_or(f, "gamma_min", c.fit.gamma_min);
            c.fit.gamma_max = detail::get_or(f, "gamma_max", c.fit.gamma_max);
            c.fit.tau0_points = detail::get_or(f, "tau0_points", c.fit.tau0_points);
            c.fit.gamma_points = detail::get_or(f, "gamma_points", c.fit.gamma_points);
            c.fit.refine_seeds = detail::get_or(f, "refine_seeds", c.fit.refine_seeds);
            c.fit.max_iterations = detail::get_or(f, "max_iterations", c.fit.max_iterations);
        }
        c.calibration = detail::get_or<std::string>(j, "calibration", c.calibration);
        c.output_dir = detail::get_or<std::string>(j, "output_dir", c.output_dir);
        c.jobs = detail::get_or<int>(j, "jobs", c.jobs);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("malformed JSON in " + path + ": " + e.what());
    }
}

inline RunConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace crossimpact
