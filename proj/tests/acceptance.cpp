// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 1 4 8      run a subset

#include <sys/resource.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "crossimpact/config.hpp"
#include "crossimpact/fitting.hpp"
#include "crossimpact/io.hpp"
#include "crossimpact/market_engine.hpp"
#include "crossimpact/philox.hpp"
#include "crossimpact/pipeline.hpp"
#include "crossimpact/response.hpp"
#include "crossimpact/synth.hpp"
#include "oracles.hpp"

using namespace crossimpact;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("crossimpact_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(CROSSIMPACT_CLI) + " " + args + " >/dev/null";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

LagCurve read_curve(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("missing output: " + p.string());
    return parse_lag_curve_csv(in);
}

IntradayGrid grid_of(int slots) { return {34800, 34800 + slots}; }

std::vector<oracle::Day> oracle_days(const StockSeries& i, const StockSeries& j) {
    std::vector<oracle::Day> out;
    for (const auto& pd : align_pair(i, j)) {
        oracle::Day d;
        d.mid_i = pd.day_i->midpoints.values;
        d.sign_i.assign(pd.day_i->signs.values.begin(), pd.day_i->signs.values.end());
        d.sign_j.assign(pd.day_j->signs.values.begin(), pd.day_j->signs.values.end());
        out.push_back(std::move(d));
    }
    return out;
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    double worst = 0.0;
    std::size_t checked = 0, count_mismatch = 0;
    auto track = [&](double a, double b) {
        worst = std::max(worst, oracle::rel_err(a, b));
        ++checked;
    };
    const auto lags = log_lags(34, 1, 9999);
    for (std::uint64_t seed : {101u, 202u, 303u}) {
        SynthSpec s;
        s.seed = seed;
        s.n_days = 5;
        s.grid = grid_of(10000);
        s.stocks = uniform_stocks(4, 0.35, 0.5, 2e-4);
        s.stocks[1].p_buy = 0.6;
        s.kernel = ImpactKernel::rise_decay(5.0, 120.0);
        s.impact = {{0, 1, 2e-4}, {2, 1, 1e-4}, {3, 0, -1e-4}, {1, 1, 3e-4}};
        auto stocks = MarketSynthesizer(s).generate_series();
        // Missing days and a late first quote.
        stocks[2].days.erase(stocks[2].days.begin() + 1);
        auto& late = stocks[3].days[0].midpoints;
        for (int t = 0; t < 77; ++t) late.values[static_cast<std::size_t>(t)] = kMissing;
        late.first_defined_slot = 77;

        for (auto policy : {AveragingPolicy::nonzero_sign, AveragingPolicy::all_seconds}) {
            const bool nz = policy == AveragingPolicy::nonzero_sign;
            std::vector<oracle::Grid> gr(lags.size(), oracle::Grid(4, std::vector<double>(4)));
            std::vector<oracle::Grid> gc = gr;
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = 0; j < 4; ++j) {
                    const auto days = oracle_days(stocks[i], stocks[j]);
                    const auto ro = oracle::response(days, lags, nz);
                    const auto co = oracle::correlator(days, lags, nz);
                    const auto no = oracle::noise(days, lags, nz);
                    const auto r = cross_response(stocks[i], stocks[j], lags, policy);
                    const auto c = sign_correlator(stocks[i], stocks[j], lags, policy);
                    const auto nu = response_noise(stocks[i], stocks[j], lags, policy);
                    for (std::size_t k = 0; k < lags.size(); ++k) {
                        track(r.values[k], ro.value[k]);
                        track(c.values[k], co.value[k]);
                        track(nu.values[k], no[k]);
                        count_mismatch += (r.counts[k] != ro.count[k]) + (c.counts[k] != co.count[k]);
                        gr[k][i][j] = ro.value[k];
                        gc[k][i][j] = co.value[k];
                    }
                }
            const auto pr = pair_curves_direct(stocks, lags, CurveKind::response, policy);
            const auto pcor = pair_curves_direct(stocks, lags, CurveKind::sign_correlator, policy);
            for (const auto* pc : {&pr, &pcor}) {
                const auto& g = pc == &pr ? gr : gc;
                const auto mkt = market_average(*pc);
                for (std::size_t k = 0; k < lags.size(); ++k) track(mkt.values[k], oracle::market(g[k]));
                for (std::size_t x = 0; x < 4; ++x) {
                    const auto pool = market_pool(4, x);
                    const auto p = passive_average(*pc, x, pool), a = active_average(*pc, x, pool);
                    for (std::size_t k = 0; k < lags.size(); ++k) {
                        track(p.values[k], oracle::passive(g[k], x));
                        track(a.values[k], oracle::active(g[k], x));
                    }
                }
            }
        }
    }
    return {worst <= 1e-12 && count_mismatch == 0,
            fmt("%zu values, max relative error %.2e, count mismatches %zu", checked, worst, count_mismatch)};
}

struct Row {
    const char* label;
    double theta, tau0, gamma;
};

// Correlator fit parameters reported for the eight stock pairs and the
// passive / active averages of AAPL, GS and XOM.
const std::vector<Row> kPublishedFits{
    {"AAPL/MSFT", 0.46, 0.05, 1.00}, {"MSFT/AAPL", 0.04, 2.34, 1.15}, {"XOM/CVX", 0.61, 0.06, 1.04},
    {"GS/JPM", 0.45, 0.07, 1.00},    {"AAPL/GS", 0.46, 0.03, 1.00},   {"GS/AAPL", 0.49, 0.06, 1.00},
    {"GS/XOM", 0.61, 0.04, 1.04},    {"XOM/AAPL", 1.18, 0.03, 1.06},  {"AAPL (p)", 0.01, 0.47, 0.68},
    {"GS (p)", 0.03, 0.23, 0.92},    {"XOM (p)", 0.27, 0.06, 1.32},   {"AAPL (a)", 0.02, 1.44, 0.90},
    {"GS (a)", 0.01, 1.31, 0.85},    {"XOM (a)", 0.02, 0.55, 0.71},
};

Outcome fit_round_trip() {
    std::vector<double> tau;
    for (int t = 1; t <= 1000; ++t) tau.push_back(t);
    double worst_rel = 0.0, worst_chi2 = 0.0;
    std::string worst_row;
    for (const auto& row : kPublishedFits) {
        std::vector<double> y;
        for (double t : tau) y.push_back(power_law_eval(row.theta, row.tau0, row.gamma, t));
        const auto f = fit_power_law(tau, y);
        const double rel = std::max({std::abs(f.theta / row.theta - 1), std::abs(f.tau0 / row.tau0 - 1),
                                     std::abs(f.gamma / row.gamma - 1)});
        if (rel > worst_rel) worst_rel = rel, worst_row = row.label;
        worst_chi2 = std::max(worst_chi2, f.chi2);
    }
    return {worst_rel <= 1e-3 && worst_chi2 <= 1e-18,
            fmt("%zu rows, max relative parameter error %.2e (%s), max chi2 %.2e", kPublishedFits.size(),
                worst_rel, worst_row.c_str(), worst_chi2)};
}

Outcome noisy_recovery() {
    std::vector<double> tau;
    for (int t = 1; t <= 1000; ++t) tau.push_back(t);
    int hits = 0;
    std::vector<double> gammas;
    for (std::uint32_t seed = 0; seed < 100; ++seed) {
        PhiloxStream rng(20080001, seed, 0, 9);
        std::vector<double> y;
        for (double t : tau) y.push_back(power_law_eval(0.45, 0.07, 1.00, t) + 0.005 * rng.normal());
        const double g = fit_power_law(tau, y).gamma;
        gammas.push_back(g);
        hits += std::abs(g - 1.0) <= 0.1;
    }
    std::sort(gammas.begin(), gammas.end());
    return {hits >= 95, fmt("%d/100 seeds with |gamma - 1| <= 0.1 (need 95); gamma p5/p50/p95 = %.2f/%.2f/%.2f",
                            hits, gammas[5], gammas[50], gammas[95])};
}

Outcome zit_null() {
    const double sigma = 1e-4, p = 0.5;
    const auto lags = log_lags();
    std::size_t inside = 0, total = 0;
    double worst_z = 0.0;
    for (int seed = 1; seed <= 10; ++seed) {
        const auto dir = scratch("zit");
        auto cfg = config_from_json(Json{
            {"synth", {{"seed", seed}, {"n_days", 250}, {"n_stocks", 2}, {"p_trade", p}, {"noise_sigma", sigma}}},
            {"lags", {{"curves", "log"}}},
            {"stages", {"respond", "correlate"}}});
        cfg.output_dir = dir.string();
        cfg.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        run_pipeline(cfg);
        for (const char* pair : {"S01__S01", "S01__S02", "S02__S01", "S02__S02"}) {
            const auto r = read_curve(dir / "pairs/response" / (std::string(pair) + ".csv"));
            const auto c = read_curve(dir / "pairs/correlator" / (std::string(pair) + ".csv"));
            for (std::size_t k = 0; k < lags.size(); ++k) {
                // Products of independent zero-mean factors: r·ε has variance
                // τσ², and ε_i(t+τ)ε_j(t) given ε_j ≠ 0 has variance p.
                const double n_r = static_cast<double>(r.counts[k]), n_c = static_cast<double>(c.counts[k]);
                const double zr = std::abs(r.values[k]) / (sigma * std::sqrt(lags[k] / n_r));
                const double zc = std::abs(c.values[k]) / std::sqrt(p / n_c);
                for (double z : {zr, zc}) {
                    ++total;
                    inside += z <= 4.0;
                    worst_z = std::max(worst_z, z);
                }
            }
        }
        fs::remove_all(dir);
    }
    const double frac = static_cast<double>(inside) / static_cast<double>(total);
    return {frac >= 0.99, fmt("%zu/%zu lag values within 4 standard errors (%.2f%%), largest |z| = %.2f", inside,
                              total, 100 * frac, worst_z)};
}

Outcome transient_shape() {
    const auto kernel = ImpactKernel::rise_decay(20.0, 300.0);
    const double sigma = 1e-4;
    const auto dir = scratch("shape");
    auto cfg = config_from_json(Json::parse(R"({
      "synth": {"seed": 5, "n_days": 250, "n_stocks": 2, "p_trade": 0.5, "noise_sigma": 1e-4,
                "impact_model": {"type": "transient_kernel",
                                 "kernel": {"shape": "rise_decay", "rise": 20, "decay": 300},
                                 "links": [{"i": "S01", "j": "S02", "amplitude": 5e-5}]}},
      "lags": {"curves": "log"},
      "stages": ["respond"],
      "pairs": [["S01", "S02"]]
    })"));
    cfg.output_dir = dir.string();
    cfg.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    run_pipeline(cfg);
    const auto r = read_curve(dir / "pairs/response/S01__S02.csv");
    fs::remove_all(dir);
    const auto& lags = r.lags;

    std::size_t expected = 0, measured = 0;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        if (kernel.level(lags[k]) > kernel.level(lags[expected])) expected = k;
        if (r.values[k] > r.values[measured]) measured = k;
    }
    auto se = [&](std::size_t k) { return sigma * std::sqrt(lags[k] / static_cast<double>(r.counts[k])); };
    const double peak = r.values[measured];
    const bool rises = r.values[0] < peak - 4 * se(measured);
    // Decay: past the peak, where the kernel has fallen below a quarter of
    // its maximum, the measured response sits well below the peak.
    double tail = 0.0, tail_se = 0.0;
    int tail_n = 0;
    for (std::size_t k = measured + 1; k < lags.size(); ++k)
        if (kernel.level(lags[k]) < 0.25 * kernel.level(lags[expected])) {
            tail += r.values[k];
            tail_se = std::max(tail_se, se(k));
            ++tail_n;
        }
    tail /= std::max(tail_n, 1);
    const bool decays = tail_n > 0 && tail < 0.5 * peak && tail < peak - 4 * tail_se;
    const long offset = static_cast<long>(measured) - static_cast<long>(expected);
    return {std::abs(offset) <= 2 && rises && decays,
            fmt("argmax at tau=%d vs kernel tau=%d (%+ld grid points, continuous peak %.1f s); R(1)=%.2e, peak=%.2e, "
                "tail mean over %d lags=%.2e",
                lags[measured], lags[expected], offset, *kernel.peak_lag(), r.values[0], peak, tail_n, tail)};
}

double median(std::vector<double> v) {
    std::erase_if(v, [](double x) { return std::isnan(x); });
    if (v.empty()) return kMissing;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome noise_identity_and_growth() {
    const auto lags = dense_lags(1000);
    const int slots = 22200;

    // Odd and even halves made of the same days.
    SynthSpec s;
    s.seed = 8;
    s.n_days = 6;
    s.grid = grid_of(slots);
    s.stocks = uniform_stocks(2, 0.5, 0.5);
    s.kernel = ImpactKernel::exponential(60.0);
    s.impact = {{0, 1, 2e-5}};
    auto base = MarketSynthesizer(s).generate_series();
    std::vector<StockSeries> twin = base;
    for (std::size_t i = 0; i < twin.size(); ++i) {
        twin[i].days.clear();
        for (std::size_t d = 0; d < base[i].days.size(); ++d)
            for (int copy = 0; copy < 2; ++copy) {
                auto day = base[i].days[d];
                day.date = date_from_days(14000 + static_cast<int>(2 * d) + copy);
                twin[i].days.push_back(std::move(day));
            }
    }
    MarketEngine twin_engine({"S01", "S02"}, lags, slots);
    twin_engine.run(twin);
    const auto twin_nu = twin_engine.response_noise();
    std::size_t defined = 0, nonzero = 0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const auto direct = response_noise(twin[i], twin[j], lags);
            for (std::size_t k = 0; k < lags.size(); ++k)
                for (double v : {twin_nu.value(i, j, k), direct.values[k]}) {
                    if (is_missing(v)) continue;
                    ++defined;
                    nonzero += v != 0.0;
                }
        }

    // A weak transient coupling over a finite number of days.
    s.seed = 9;
    s.n_days = 60;
    s.impact = {{0, 1, 1e-5}};
    MarketEngine engine({"S01", "S02"}, lags, slots);
    engine.run(MarketSynthesizer(s).generate_series());
    const auto nu = engine.response_noise().curve(0, 1);
    std::vector<double> short_lags, long_lags;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        if (lags[k] <= 120) short_lags.push_back(nu.values[k]);
        if (lags[k] >= 500) long_lags.push_back(nu.values[k]);
    }
    const double m_short = median(short_lags), m_long = median(long_lags);
    return {defined > 0 && nonzero == 0 && m_long > m_short,
            fmt("identical halves: %zu/%zu defined values nonzero; median noise %.3f (1-120 s) vs %.3f (500-1000 s)",
                nonzero, defined, m_short, m_long)};
}

Outcome matrix_structure() {
    // Normalization on arbitrary matrices, including holes and negative extremes.
    PhiloxStream rng(77, 0, 0, 11);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 30);
        std::vector<std::string> syms, sectors;
        for (std::size_t i = 0; i < n; ++i) {
            syms.push_back("X" + std::to_string(i));
            sectors.push_back(default_sector_order()[i % 10]);
        }
        const double scale = std::pow(10.0, -8 + 8 * rng.uniform());
        std::vector<double> raw(n * n);
        for (auto& v : raw) v = rng.uniform() < 0.05 ? kMissing : scale * rng.normal();
        const auto m = market_response_matrix(syms, sectors, raw, 1);
        double top = 0.0;
        for (double v : m.normalized)
            if (!is_missing(v)) top = std::max(top, std::abs(v));
        worst = std::max(worst, std::abs(top - 1.0));
    }

    // Planted dominant driver: S01 moves every other price.
    const auto dir = scratch("driver");
    auto cfg = config_from_json(Json::parse(R"({
      "synth": {"seed": 12, "n_days": 40, "n_stocks": 10, "p_trade": 0.5, "noise_sigma": 1e-4,
                "sectors": ["I", "HC", "CD", "IT", "U", "F", "M", "E", "CS", "TS"],
                "impact_model": {"type": "transient_kernel", "kernel": {"shape": "step"},
                                 "links": [{"i": "*", "j": "S01", "amplitude": 1e-4}]}},
      "stages": ["matrix"]
    })"));
    cfg.output_dir = dir.string();
    cfg.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    run_pipeline(cfg);
    double min_ratio = INFINITY;
    bool unit = true;
    for (int tau : cfg.matrix_lags) {
        std::ifstream in(dir / "matrix" / ("response_tau" + std::to_string(tau) + ".csv"));
        std::string line;
        std::getline(in, line);
        std::vector<std::string> cols;
        {
            std::stringstream ss(line);
            std::string cell;
            std::getline(ss, cell, ',');
            while (std::getline(ss, cell, ',')) cols.push_back(cell);
        }
        std::vector<std::vector<double>> v;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string cell;
            std::getline(ss, cell, ',');
            v.emplace_back();
            while (std::getline(ss, cell, ',')) v.back().push_back(std::stod(cell));
        }
        const std::size_t n = cols.size();
        const std::size_t driver = std::find(cols.begin(), cols.end(), "S01") - cols.begin();
        double top = 0.0, col = 0.0, all = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                top = std::max(top, std::abs(v[i][j]));
                if (i == j) continue;
                all += v[i][j];
                if (j == driver) col += v[i][j];
            }
        unit = unit && top == 1.0;
        const double ratio = (col / static_cast<double>(n - 1)) / (all / static_cast<double>(n * (n - 1)));
        min_ratio = std::min(min_ratio, ratio);
    }
    fs::remove_all(dir);
    return {worst == 0.0 && unit && min_ratio >= 3.0,
            fmt("200 random matrices: max |1 - max|entry|| = %.1e; driver column / off-diagonal mean >= %.2f over "
                "%zu lags",
                worst, min_ratio, cfg.matrix_lags.size())};
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_text_file(e.path());
    return out;
}

Outcome determinism() {
    const auto dir = scratch("determinism");
    write_text_file(dir / "market.json", dump_json(Json::parse(R"({
      "synth": {"seed": 2024, "n_days": 12, "n_stocks": 5, "p_trade": 0.4,
                "sectors": ["F", "F", "E", "IT", "IT"],
                "sign_model": {"type": "latent_factor",
                               "factors": [{"tau0": 3.0, "gamma": 0.8, "sector_loadings": {"F": 0.6}}]},
                "impact_model": {"type": "transient_kernel", "kernel": {"shape": "exponential", "decay": 100},
                                 "links": [{"i": "*", "j": "S01", "amplitude": 5e-5}]}}
    })")));
    std::vector<std::map<std::string, std::string>> runs;
    std::string why;
    for (int jobs : {1, 1, 8, 8}) {
        const auto out = dir / ("run" + std::to_string(runs.size()));
        const int rc = cli("--config " + (dir / "market.json").string() + " --out " + out.string() +
                           " --jobs " + std::to_string(jobs) + " run");
        if (rc != 0) return {false, fmt("run exited with %d", rc)};
        runs.push_back(tree(out));
    }
    std::size_t differing = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r] != runs[0]) ++differing;
    const std::size_t files = runs[0].size();
    fs::remove_all(dir);
    return {differing == 0 && files > 10,
            fmt("4 runs (jobs 1,1,8,8), %zu files each, %zu runs differing from the first", files, differing)};
}

Outcome performance() {
    const auto dir = scratch("performance");
    write_text_file(dir / "market.json", dump_json(Json::parse(R"({
      "synth": {"seed": 99, "n_days": 250, "n_stocks": 99, "p_trade": 0.5,
                "sectors": ["I", "HC", "CD", "IT", "U", "F", "M", "E", "CS", "TS"],
                "impact_model": {"type": "transient_kernel", "kernel": {"shape": "exponential", "decay": 300},
                                 "links": [{"i": "*", "j": "S01", "amplitude": 2e-5}]}},
      "lags": {"curves": "log", "matrix": "matrix", "rank": "matrix", "primary": 300},
      "stages": ["matrix", "average", "rank"]
    })")));
    const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = cli("--config " + (dir / "market.json").string() + " --out " + (dir / "out").string() +
                       " --jobs " + std::to_string(std::min(cores, 8u)) + " run");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rusage ru{};
    getrusage(RUSAGE_CHILDREN, &ru);
    const double gb = static_cast<double>(ru.ru_maxrss) / (1024.0 * 1024.0);
    const bool written = fs::exists(dir / "out/matrix/response_tau7200.csv") &&
                         fs::exists(dir / "out/averages/market_response.csv");
    fs::remove_all(dir);
    return {rc == 0 && written && secs <= 600.0 && gb <= 8.0,
            fmt("99 stocks x 250 days on %u core(s): %.0f s wall, %.2f GB peak resident (exit %d)",
                std::min(cores, 8u), secs, gb, rc)};
}

Outcome memory_flip() {
    // Short-memory pair correlators whose decay scales differ by decades.
    const std::size_t n = 6;
    const auto lags = dense_lags(1000);
    std::vector<std::string> syms;
    for (std::size_t i = 0; i < n; ++i) syms.push_back("P" + std::to_string(i));
    PairCurves pc(CurveKind::sign_correlator, syms, lags);
    const double tau0s[] = {0.05, 0.4, 3.0, 20.0, 120.0, 400.0};
    double min_gamma = INFINITY;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            // Every passive and every active pool spans five decay scales.
            const double tau0 = tau0s[(i + j) % n];
            const double theta = 0.02 + 0.01 * static_cast<double>((i + 2 * j) % 5);
            const double gamma = 1.02 + 0.05 * static_cast<double>((2 * i + j) % 3);
            for (std::size_t k = 0; k < lags.size(); ++k) {
                pc.values[pc.offset(i, j) + k] = power_law_eval(theta, tau0, gamma, lags[k]);
                pc.counts[pc.offset(i, j) + k] = 1;
            }
            if (i != j) min_gamma = std::min(min_gamma, fit_power_law(pc.curve(i, j)).gamma);
        }
    double worst_avg = 0.0;
    for (std::size_t s = 0; s < n; ++s)
        for (auto mode : {0, 1}) {
            const auto pool = market_pool(n, s);
            const auto avg = mode == 0 ? passive_average(pc, s, pool) : active_average(pc, s, pool);
            worst_avg = std::max(worst_avg, fit_power_law(avg).gamma);
        }
    return {min_gamma >= 1.0 && worst_avg < min_gamma,
            fmt("min individual gamma %.3f; largest averaged gamma %.3f over %zu passive and active averages",
                min_gamma, worst_avg, 2 * n)};
}

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "estimators match brute-force references", oracle_equivalence},
        {2, "noiseless fit round trip of the published parameter rows", fit_round_trip},
        {3, "noisy gamma recovery", noisy_recovery},
        {4, "zero-intelligence null market", zit_null},
        {5, "transient impact rises then decays", transient_shape},
        {6, "response noise identity and growth", noise_identity_and_growth},
        {7, "matrix normalization and dominant-driver stripe", matrix_structure},
        {8, "byte-identical reruns at 1 and 8 jobs", determinism},
        {9, "99-stock market within 10 min and 8 GB", performance},
        {10, "averaged short-memory correlators look long-memory", memory_flip},
    };
    std::vector<int> wanted;
    for (int a = 1; a < argc; ++a) wanted.push_back(std::atoi(argv[a]));

    int failures = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << c.title << " | "
                  << o.detail << fmt(" [%.1f s]", secs) << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
