#pragma once

// Mapping from the correlation r of two latent Gaussian variables to the sign
// correlation E[s(X) s(Y) | s(Y) != 0] after symmetric thresholding at
// ±Φ⁻¹(1 − p/2), where p is the probability of a nonzero sign. Tabulated by
// Monte Carlo on a (p, r) grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include "json.hpp"

#include "crossimpact/errors.hpp"
#include "crossimpact/philox.hpp"

namespace crossimpact {

/// Φ⁻¹(1 − q): the level exceeded by a standard normal with probability q.
inline double upper_normal_quantile(double q) {
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    if (q >= 1.0) return -std::numeric_limits<double>::infinity();
    return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * q);
}

struct SignCalibration {
    std::vector<double> p_trade;  // ascending
    std::vector<double> r;        // ascending, from 0 to 1
    std::vector<double> theta;    // [p index * r.size() + r index]
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;

    double at(std::size_t pi, std::size_t ri) const { return theta[pi * r.size() + ri]; }

    void validate() const {
        if (p_trade.size() < 1 || r.size() < 2 || theta.size() != p_trade.size() * r.size())
            throw DataError("calibration table has inconsistent dimensions");
        if (r.front() != 0.0 || r.back() != 1.0)
            throw DataError("calibration table must span r in [0, 1]");
        if (!std::is_sorted(p_trade.begin(), p_trade.end()) ||
            !std::is_sorted(r.begin(), r.end()))
            throw DataError("calibration grids must be ascending");
    }

    /// Sign correlation at trade probability p and latent correlation r in
    /// [-1, 1]; linear in r, linear in p between grid rows.
    double lookup(double p, double rr) const {
        const auto row = row_at(p);
        const double a = std::abs(rr);
        if (a > 1.0) throw UsageError("calibration lookup: |r| > 1");
        auto it = std::upper_bound(r.begin(), r.end(), a);
        std::size_t k = it == r.end() ? r.size() - 1 : static_cast<std::size_t>(it - r.begin());
        k = std::max<std::size_t>(k, 1);
        const double w = (a - r[k - 1]) / (r[k] - r[k - 1]);
        const double v = row[k - 1] + w * (row[k] - row[k - 1]);
        return rr < 0 ? -v : v;
    }

    /// Largest sign correlation reachable at probability p.
    double max_theta(double p) const { return row_at(p).back(); }

    /// Latent correlation giving sign correlation `target` >= 0, or nullopt
    /// when the target exceeds what the table reaches.
    std::optional<double> inverse(double p, double target) const {
        if (target < 0) {
            auto v = inverse(p, -target);
            if (v) return -*v;
            return std::nullopt;
        }
        const auto row = row_at(p);
        if (target > row.back()) return std::nullopt;
        for (std::size_t k = 1; k < r.size(); ++k) {
            if (target <= row[k]) {
                const double span = row[k] - row[k - 1];
                const double w = span > 0 ? (target - row[k - 1]) / span : 0.0;
                return r[k - 1] + w * (r[k] - r[k - 1]);
            }
        }
        return r.back();
    }

    nlohmann::json to_json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t pi = 0; pi < p_trade.size(); ++pi)
            rows.push_back(std::vector<double>(theta.begin() + static_cast<std::ptrdiff_t>(pi * r.size()),
                                               theta.begin() + static_cast<std::ptrdiff_t>((pi + 1) * r.size())));
        return {{"samples", samples}, {"seed", seed}, {"p_trade", p_trade}, {"r", r}, {"theta", rows}};
    }

    static SignCalibration from_json(const nlohmann::json& j) {
        SignCalibration c;
        try {
            c.samples = j.at("samples").get<std::uint64_t>();
            c.seed = j.at("seed").get<std::uint64_t>();
            c.p_trade = j.at("p_trade").get<std::vector<double>>();
            c.r = j.at("r").get<std::vector<double>>();
            for (const auto& row : j.at("theta")) {
                auto v = row.get<std::vector<double>>();
                if (v.size() != c.r.size()) throw DataError("calibration row length mismatch");
                c.theta.insert(c.theta.end(), v.begin(), v.end());
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("malformed calibration table: ") + e.what());
        }
        c.validate();
        return c;
    }

    static SignCalibration load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open calibration table: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed calibration table " + path + ": " + e.what());
        }
        return from_json(j);
    }

private:
    std::vector<double> row_at(double p) const {
        if (!(p > 0.0) || p > 1.0) throw UsageError("calibration lookup: p_trade must be in (0, 1]");
        if (p < p_trade.front() || p > p_trade.back())
            throw UsageError("calibration lookup: p_trade outside the tabulated range");
        auto it = std::lower_bound(p_trade.begin(), p_trade.end(), p);
        const std::size_t hi = static_cast<std::size_t>(it - p_trade.begin());
        std::vector<double> row(r.size());
        if (p_trade[hi] == p || hi == 0) {
            for (std::size_t k = 0; k < r.size(); ++k) row[k] = at(hi, k);
            return row;
        }
        const double w = (p - p_trade[hi - 1]) / (p_trade[hi] - p_trade[hi - 1]);
        for (std::size_t k = 0; k < r.size(); ++k)
            row[k] = at(hi - 1, k) + w * (at(hi, k) - at(hi - 1, k));
        return row;
    }
};

inline std::vector<double> default_calibration_p_grid() {
    std::vector<double> out;
    for (int k = 1; k <= 10; ++k) out.push_back(k / 10.0);
    return out;
}

inline std::vector<double> default_calibration_r_grid() {
    std::vector<double> out;
    for (int k = 0; k <= 50; ++k) out.push_back(k / 50.0);
    return out;
}

/// Brute-force table: the same normal pairs are reused for every cell, and
/// each cell averages the estimates at +r and −r so that r = 0 maps to 0.
inline SignCalibration calibrate_sign_mapping(std::vector<double> p_grid, std::vector<double> r_grid,
                                              std::uint64_t samples, std::uint64_t seed) {
    if (samples == 0) throw UsageError("calibration needs at least one sample");
    for (double p : p_grid)
        if (!(p > 0.0) || p > 1.0) throw UsageError("calibration p_trade values must be in (0, 1]");
    SignCalibration c;
    c.p_trade = std::move(p_grid);
    c.r = std::move(r_grid);
    c.samples = samples;
    c.seed = seed;
    c.theta.assign(c.p_trade.size() * c.r.size(), 0.0);
    c.validate();

    std::vector<double> z1(samples), z2(samples);
    PhiloxStream rng(seed, 0, 0, 0);
    for (std::uint64_t n = 0; n < samples; ++n) {
        z1[n] = rng.normal();
        z2[n] = rng.normal();
    }
    auto s = [](double v, double cut) { return v > cut ? 1 : (v < -cut ? -1 : 0); };
    for (std::size_t pi = 0; pi < c.p_trade.size(); ++pi) {
        const double p = c.p_trade[pi];
        const double cut = upper_normal_quantile(0.5 * p);
        for (std::size_t ri = 0; ri < c.r.size(); ++ri) {
            const double rr = c.r[ri];
            const double q = std::sqrt(std::max(0.0, 1.0 - rr * rr));
            std::int64_t acc = 0;
            for (std::uint64_t n = 0; n < samples; ++n) {
                const int sx = s(z1[n], cut);
                if (sx == 0) continue;
                acc += sx * (s(rr * z1[n] + q * z2[n], cut) - s(-rr * z1[n] + q * z2[n], cut));
            }
            c.theta[pi * c.r.size() + ri] =
                0.5 * static_cast<double>(acc) / (static_cast<double>(samples) * p);
        }
    }
    return c;
}

inline std::string default_calibration_path() {
#ifdef CROSSIMPACT_DATA_DIR
    return std::string(CROSSIMPACT_DATA_DIR) + "/calibration/sign_calibration.json";
#else
    return "data/calibration/sign_calibration.json";
#endif
}

}  // namespace crossimpact
