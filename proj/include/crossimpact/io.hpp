#pragma once

// Plain-text artifacts: lag curves, dense matrices with a JSON sidecar, fit
// results, sign and midpoint series, rankings; SHA-256 digests of files.

#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "crossimpact/errors.hpp"
#include "crossimpact/fitting.hpp"
#include "crossimpact/ingest.hpp"
#include "crossimpact/response.hpp"
#include "crossimpact/returns.hpp"
#include "crossimpact/signing.hpp"

namespace crossimpact {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Files and digests

inline void write_text_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
    if (!out) throw DataError("write failed: " + path.string());
}

inline std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    std::ostringstream hex;
    for (unsigned int k = 0; k < len; ++k)
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
    return hex.str();
}

inline std::string sha256_file(const fs::path& path) { return sha256_hex(read_text_file(path)); }

// ---------------------------------------------------------------------------
// Lag curves

/// `tau,value,count`; missing values are written as nan.
inline std::string lag_curve_csv(const LagCurve& c) {
    std::string out = "tau,value,count\n";
    for (std::size_t k = 0; k < c.size(); ++k) {
        out += std::to_string(c.lags[k]);
        out += ',';
        out += detail::format_double(c.values[k]);
        out += ',';
        out += std::to_string(k < c.counts.size() ? c.counts[k] : 0);
        out += '\n';
    }
    return out;
}

inline LagCurve parse_lag_curve_csv(std::istream& in) {
    LagCurve c;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty curve file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = detail::split_fields(line, ',');
    if (header.size() < 2 || header[0] != "tau" || header[1] != "value")
        throw DataError("curve file must start with a tau,value header");
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = detail::split_fields(line, ',');
        auto tau = f.size() >= 2 ? detail::parse_int(f[0]) : std::nullopt;
        auto v = f.size() >= 2 ? detail::parse_double(f[1]) : std::nullopt;
        if (!tau || !v) throw DataError("malformed curve row: " + line);
        std::uint64_t n = 0;
        if (f.size() >= 3) {
            auto cnt = detail::parse_int(f[2]);
            if (!cnt || *cnt < 0) throw DataError("malformed curve row: " + line);
            n = static_cast<std::uint64_t>(*cnt);
        }
        c.lags.push_back(static_cast<int>(*tau));
        c.values.push_back(*v);
        c.counts.push_back(n);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Matrices

/// Dense grid: a header of column symbols, then one row per stock i.
inline std::string matrix_csv(const ResponseMatrix& m) {
    std::string out = "symbol";
    for (const auto& s : m.symbols) out += "," + s;
    out += '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += m.symbols[i];
        for (std::size_t j = 0; j < m.size(); ++j) {
            out += ',';
            out += detail::format_double(m.at(i, j));
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json matrix_sidecar(const ResponseMatrix& m) {
    return {{"tau", m.tau},
            {"normalizer", m.normalizer},
            {"degenerate", m.degenerate},
            {"sector_boundaries", m.sector_boundaries},
            {"symbols", m.symbols},
            {"sectors", m.sectors}};
}

/// Writes `<stem>.csv` and `<stem>.json`; returns both paths.
inline std::vector<fs::path> emit_heatmap_data(const ResponseMatrix& m, const fs::path& stem) {
    if (m.size() == 0) throw UsageError("cannot emit an empty matrix");
    fs::path csv = stem;
    csv += ".csv";
    fs::path json = stem;
    json += ".json";
    write_text_file(csv, matrix_csv(m));
    write_text_file(json, matrix_sidecar(m).dump(2) + "\n");
    return {csv, json};
}

// ---------------------------------------------------------------------------
// Fits

inline nlohmann::ordered_json fit_to_json(const FitResult& f) {
    return {{"theta", f.theta},
            {"tau0", f.tau0},
            {"gamma", f.gamma},
            {"chi2", f.chi2},
            {"M", f.n_points},
            {"memory_class", f.memory_class()},
            {"identifiable", f.identifiable}};
}

// ---------------------------------------------------------------------------
// Per-day series

/// Nonzero seconds only: `second,epsilon` with the second of day.
inline std::string signs_csv(const SignSeries& s, const IntradayGrid& grid) {
    std::string out = "second,epsilon\n";
    for (std::size_t t = 0; t < s.values.size(); ++t) {
        if (s.values[t] == 0) continue;
        out += std::to_string(grid.open_second + static_cast<int>(t));
        out += ',';
        out += std::to_string(static_cast<int>(s.values[t]));
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json signs_sidecar(const SignSeries& s, std::size_t undefined_prefix) {
    const auto c = count_signs(s);
    return {{"symbol", s.symbol},
            {"date", format_date(s.date)},
            {"buy_seconds", c.buy_seconds},
            {"sell_seconds", c.sell_seconds},
            {"zero_seconds", c.zero_seconds},
            {"undefined_prefix", undefined_prefix}};
}

/// Every grid second: `second,midpoint`, nan before the first quote.
inline std::string midpoints_csv(const MidpointSeries& m, const IntradayGrid& grid) {
    std::string out = "second,midpoint\n";
    for (std::size_t t = 0; t < m.values.size(); ++t) {
        out += std::to_string(grid.open_second + static_cast<int>(t));
        out += ',';
        out += detail::format_double(m.values[t]);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rankings

inline std::string ranking_csv(std::span<const RankEntry> ranked, std::span<const int> lags) {
    std::string out = "rank,symbol";
    for (int tau : lags) out += ",tau_" + std::to_string(tau);
    out += '\n';
    for (std::size_t r = 0; r < ranked.size(); ++r) {
        out += std::to_string(r + 1) + "," + ranked[r].symbol;
        for (double v : ranked[r].values) out += "," + detail::format_double(v);
        out += '\n';
    }
    return out;
}

}  // namespace crossimpact
