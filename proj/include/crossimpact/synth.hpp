#pragma once

// Synthetic markets with known ground truth: i.i.d. (zero-intelligence) sign
// flow or latent-factor signs with prescribed cross-correlation, and log
// midpoints driven by noise plus a transient impact kernel.
//
// Random streams are Philox4x32-10 keyed by the seed, with counter words
// (block, day, entity, purpose); see PhiloxStream.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "crossimpact/calibration.hpp"
#include "crossimpact/errors.hpp"
#include "crossimpact/ingest.hpp"
#include "crossimpact/philox.hpp"
#include "crossimpact/series.hpp"

namespace crossimpact {

enum class StreamPurpose : std::uint32_t { signs = 1, returns = 2, latent = 3 };

/// Power-law autocorrelation ρ(τ) = (1 + (τ/τ⁰)²)^(−γ/2).
inline double cauchy_correlation(double tau0, double gamma, double tau) {
    return std::exp(-0.5 * gamma * std::log1p((tau / tau0) * (tau / tau0)));
}

// ---------------------------------------------------------------------------
// Impact kernel

/// One exponential component of a kernel: weight · decay^ℓ.
struct ExpTerm {
    double weight = 0.0;
    double decay = 0.0;

    friend bool operator==(const ExpTerm&, const ExpTerm&) = default;
};

/// Level propagator G(ℓ): the log-price displacement ℓ >= 1 seconds after a
/// unit signed trade, as a sum of exponentials so it can be applied with
/// recursive filters.
struct ImpactKernel {
    enum class Shape { none, step, exponential, rise_decay, custom };

    Shape shape = Shape::none;
    double rise = 0.0;   // rise_decay time scale (s)
    double decay = 0.0;  // exponential / rise_decay time scale (s)
    std::vector<ExpTerm> terms;

    static ImpactKernel none() { return {}; }

    /// Permanent unit step one second after the trade.
    static ImpactKernel step() {
        ImpactKernel k;
        k.shape = Shape::step;
        k.terms = {{1.0, 1.0}};
        return k;
    }

    static ImpactKernel exponential(double timescale) {
        ImpactKernel k;
        k.shape = Shape::exponential;
        k.decay = timescale;
        k.terms = {{1.0, std::exp(-1.0 / timescale)}};
        k.validate();
        return k;
    }

    /// G(ℓ) = (1 − e^(−ℓ/rise)) e^(−ℓ/decay): rises, peaks, then reverts.
    static ImpactKernel rise_decay(double rise_time, double decay_time) {
        ImpactKernel k;
        k.shape = Shape::rise_decay;
        k.rise = rise_time;
        k.decay = decay_time;
        k.terms = {{1.0, std::exp(-1.0 / decay_time)},
                   {-1.0, std::exp(-1.0 / rise_time - 1.0 / decay_time)}};
        k.validate();
        return k;
    }

    static ImpactKernel custom(std::vector<ExpTerm> t) {
        ImpactKernel k;
        k.shape = Shape::custom;
        k.terms = std::move(t);
        k.validate();
        return k;
    }

    bool empty() const { return terms.empty(); }

    double level(long lag) const {
        if (lag < 1) return 0.0;
        double g = 0.0;
        for (const auto& term : terms) g += term.weight * std::pow(term.decay, static_cast<double>(lag));
        return g;
    }

    void validate() const {
        if ((shape == Shape::exponential || shape == Shape::rise_decay) &&
            (!std::isfinite(decay) || !(decay > 0.0)))
            throw NumericError("impact kernel decay time must be finite and positive");
        if (shape == Shape::rise_decay && (!std::isfinite(rise) || !(rise > 0.0)))
            throw NumericError("impact kernel rise time must be finite and positive");
        for (const auto& term : terms)
            if (!std::isfinite(term.weight) || !std::isfinite(term.decay) || term.decay < 0.0 ||
                term.decay > 1.0)
                throw NumericError("impact kernel has non-finite or non-decaying terms");
    }

    /// Continuous maximizer of G for the rise-decay shape.
    std::optional<double> peak_lag() const {
        if (shape != Shape::rise_decay) return std::nullopt;
        return rise * std::log1p(decay / rise);
    }

    friend bool operator==(const ImpactKernel&, const ImpactKernel&) = default;
};

inline const char* to_string(ImpactKernel::Shape s) {
    switch (s) {
        case ImpactKernel::Shape::none: return "none";
        case ImpactKernel::Shape::step: return "step";
        case ImpactKernel::Shape::exponential: return "exponential";
        case ImpactKernel::Shape::rise_decay: return "rise_decay";
        case ImpactKernel::Shape::custom: return "custom";
    }
    return "none";
}

// ---------------------------------------------------------------------------
// Specification

struct SynthStock {
    std::string symbol;
    std::string sector;
    double p_trade = 1.0;       // probability of a nonzero sign per second
    double p_buy = 0.5;         // probability that a nonzero sign is +1
    double noise_sigma = 1e-4;  // per-second idiosyncratic log-return volatility
    double price0 = 100.0;      // opening midpoint

    friend bool operator==(const SynthStock&, const SynthStock&) = default;
};

/// Stationary Gaussian factor with power-law autocorrelation; loadings are
/// aligned with SynthSpec::stocks.
struct LatentFactor {
    double tau0 = 1.0;
    double gamma = 1.0;
    std::vector<double> loadings;

    friend bool operator==(const LatentFactor&, const LatentFactor&) = default;
};

/// Requested cross sign correlator Θ_ij(τ) = ϑ (1 + (τ/τ⁰)²)^(−γ/2).
struct CorrelationTarget {
    std::size_t i = 0;
    std::size_t j = 0;
    double theta = 0.0;
    double tau0 = 1.0;
    double gamma = 1.0;

    double operator()(double tau) const { return theta * cauchy_correlation(tau0, gamma, tau); }

    friend bool operator==(const CorrelationTarget&, const CorrelationTarget&) = default;
};

/// Stock j's trades move stock i's price by amplitude · G(ℓ).
struct ImpactLink {
    std::size_t i = 0;
    std::size_t j = 0;
    double amplitude = 0.0;

    friend bool operator==(const ImpactLink&, const ImpactLink&) = default;
};

enum class SignModel { iid, latent_factor };

inline const char* to_string(SignModel m) {
    return m == SignModel::iid ? "iid" : "latent_factor";
}

struct SynthSpec {
    std::uint64_t seed = 1;
    int n_days = 10;
    IntradayGrid grid;
    Date first_date{std::chrono::year{2008}, std::chrono::month{1}, std::chrono::day{2}};
    SignModel sign_model = SignModel::iid;
    std::vector<SynthStock> stocks;
    std::vector<LatentFactor> factors;
    std::vector<CorrelationTarget> targets;
    ImpactKernel kernel;
    std::vector<ImpactLink> impact;
    double half_spread = 5e-4;  // relative to the midpoint
    double tick = 0.01;

    std::size_t n_stocks() const { return stocks.size(); }

    friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

/// One generated day for every stock of the market.
struct SynthDay {
    int index = 0;
    Date date;
    std::vector<std::vector<Sign>> signs;  // [stock][slot]
    std::vector<std::vector<double>> bid;  // [stock][slot]
    std::vector<std::vector<double>> ask;  // [stock][slot]
};

/// Resolved latent coupling for one correlation target.
struct TargetResolution {
    CorrelationTarget target;
    double latent_correlation = 0.0;  // κ: latent cross-correlation at τ = 0
    double achievable_theta = 0.0;    // largest ϑ reachable at this τ⁰, γ, p
};

// ---------------------------------------------------------------------------
// Generator

class MarketSynthesizer {
public:
    explicit MarketSynthesizer(SynthSpec spec, const SignCalibration* calibration = nullptr)
        : spec_(std::move(spec)) {
        validate();
        resolve_targets(calibration);
        check_loadings();
        prepare_factors();
    }

    const SynthSpec& spec() const { return spec_; }
    /// Factors after correlation targets were turned into loadings.
    const std::vector<LatentFactor>& factors() const { return factors_; }
    const std::vector<TargetResolution>& resolutions() const { return resolutions_; }

    /// d-th weekday on or after the first date.
    Date date_of(int d) const {
        using namespace std::chrono;
        sys_days day{spec_.first_date};
        while (weekday{day}.c_encoding() == 0 || weekday{day}.c_encoding() == 6) day += days{1};
        for (int k = 0; k < d; ++k) {
            day += days{1};
            while (weekday{day}.c_encoding() == 0 || weekday{day}.c_encoding() == 6) day += days{1};
        }
        return Date{day};
    }

    SynthDay generate_day(int d) const {
        const std::size_t n = spec_.n_stocks();
        const auto slots = static_cast<std::size_t>(spec_.grid.slots());
        SynthDay out;
        out.index = d;
        out.date = date_of(d);
        out.signs.assign(n, std::vector<Sign>(slots, 0));
        out.bid.assign(n, std::vector<double>(slots));
        out.ask.assign(n, std::vector<double>(slots));

        if (spec_.sign_model == SignModel::iid) {
            for (std::size_t i = 0; i < n; ++i) iid_signs(d, i, out.signs[i]);
        } else {
            std::vector<std::vector<double>> paths;
            for (std::size_t f = 0; f < factors_.size(); ++f) paths.push_back(latent_path(d, f));
            for (std::size_t i = 0; i < n; ++i) latent_signs(d, i, paths, out.signs[i]);
        }

        std::vector<double> driver(slots);
        for (std::size_t i = 0; i < n; ++i) {
            std::fill(driver.begin(), driver.end(), 0.0);
            for (const auto& link : spec_.impact) {
                if (link.i != i) continue;
                const auto& sj = out.signs[link.j];
                for (std::size_t t = 0; t < slots; ++t) driver[t] += link.amplitude * sj[t];
            }
            prices(d, i, driver, out.bid[i], out.ask[i]);
        }
        return out;
    }

    /// Processed view of one stock-day, identical to what the ingest path
    /// yields for tick_day() output.
    StockDay stock_day(const SynthDay& day, std::size_t i) const {
        StockDay s;
        s.date = day.date;
        const auto& signs = day.signs[i];
        s.trading_day = std::any_of(signs.begin(), signs.end(), [](Sign v) { return v != 0; });
        s.signs.symbol = spec_.stocks[i].symbol;
        s.signs.date = day.date;
        s.signs.values = signs;
        s.midpoints.symbol = spec_.stocks[i].symbol;
        s.midpoints.date = day.date;
        s.midpoints.values.resize(signs.size());
        for (std::size_t t = 0; t < signs.size(); ++t)
            s.midpoints.values[t] = QuoteEvent{0, 1, day.bid[i][t], day.ask[i][t]}.midpoint();
        s.midpoints.first_defined_slot = 0;
        return s;
    }

    /// Trades and quotes whose tick-rule signs and forward-filled midpoints
    /// reproduce the day exactly. One quote per second; one trade per signed
    /// second, preceded by an unsigned opening trade.
    TickDay tick_day(const SynthDay& day, std::size_t i) const {
        TickDay out;
        out.symbol = spec_.stocks[i].symbol;
        out.date = day.date;
        const auto& signs = day.signs[i];
        const auto& bid = day.bid[i];
        const auto& ask = day.ask[i];
        out.quotes.reserve(signs.size());
        double last = 0.0;
        Sign last_sign = 0;
        bool opened = false;
        for (std::size_t t = 0; t < signs.size(); ++t) {
            const SecondOfDay sec = spec_.grid.open_second + static_cast<SecondOfDay>(t);
            out.quotes.push_back({sec, 1, bid[t], ask[t]});
            const Sign s = signs[t];
            if (s == 0) continue;
            int seq = 1;
            if (!opened) {
                last = 0.5 * (bid[t] + ask[t]);
                out.trades.push_back({sec, seq++, last, 100});
                opened = true;
            }
            double price;
            if (s > 0) {
                if (ask[t] > last) price = ask[t];
                else if (last_sign > 0) price = last;
                else price = last + spec_.tick;
            } else {
                if (bid[t] < last) price = bid[t];
                else if (last_sign < 0) price = last;
                else price = last - spec_.tick;
            }
            if (!(price > 0.0)) throw NumericError("synthetic trade price fell to zero");
            out.trades.push_back({sec, seq, price, 100});
            last = price;
            last_sign = s;
        }
        return out;
    }

    std::vector<StockSeries> generate_series() const {
        std::vector<StockSeries> out(spec_.n_stocks());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i].symbol = spec_.stocks[i].symbol;
            out[i].sector = spec_.stocks[i].sector;
        }
        for (int d = 0; d < spec_.n_days; ++d) {
            const auto day = generate_day(d);
            for (std::size_t i = 0; i < out.size(); ++i) out[i].days.push_back(stock_day(day, i));
        }
        return out;
    }

private:
    SynthSpec spec_;
    std::vector<LatentFactor> factors_;
    std::vector<TargetResolution> resolutions_;
    std::vector<std::vector<double>> spectra_;  // sqrt(λ_k / m) per factor
    std::vector<double> residual_;              // idiosyncratic latent weight per stock
    std::vector<double> cut_up_, cut_down_;     // latent thresholds per stock

    void validate() const {
        spec_.grid.validate();
        if (spec_.n_days < 0) throw UsageError("synth: n_days must be non-negative");
        if (spec_.stocks.empty()) throw UsageError("synth: at least one stock is required");
        for (const auto& s : spec_.stocks) {
            if (!(s.p_trade >= 0.0 && s.p_trade <= 1.0) || !(s.p_buy >= 0.0 && s.p_buy <= 1.0))
                throw UsageError("synth: invalid probabilities for stock " + s.symbol);
            if (!std::isfinite(s.noise_sigma) || s.noise_sigma < 0.0)
                throw UsageError("synth: noise_sigma must be finite and non-negative");
            if (!std::isfinite(s.price0) || !(s.price0 > 0.0))
                throw UsageError("synth: price0 must be positive");
        }
        if (!(spec_.half_spread > 0.0 && spec_.half_spread < 0.5))
            throw UsageError("synth: half_spread must lie in (0, 0.5)");
        if (!std::isfinite(spec_.tick) || !(spec_.tick > 0.0))
            throw UsageError("synth: tick must be positive");
        spec_.kernel.validate();
        for (const auto& link : spec_.impact) {
            if (link.i >= spec_.n_stocks() || link.j >= spec_.n_stocks())
                throw UsageError("synth: impact link refers to an unknown stock");
            if (!std::isfinite(link.amplitude))
                throw NumericError("synth: impact amplitude must be finite");
        }
        if (spec_.sign_model == SignModel::iid && (!spec_.factors.empty() || !spec_.targets.empty()))
            throw UsageError("synth: latent factors and targets need the latent_factor sign model");
        for (const auto& f : spec_.factors) {
            if (!(f.tau0 > 0.0) || !(f.gamma > 0.0) || !std::isfinite(f.tau0) || !std::isfinite(f.gamma))
                throw UsageError("synth: latent factor tau0 and gamma must be positive");
            if (f.loadings.size() != spec_.n_stocks())
                throw UsageError("synth: latent factor loadings must cover every stock");
        }
    }

    void resolve_targets(const SignCalibration* calibration) {
        factors_ = spec_.factors;
        if (spec_.targets.empty()) return;
        if (!calibration) throw UsageError("synth: correlation targets need a calibration table");
        for (const auto& target : spec_.targets) {
            if (target.i >= spec_.n_stocks() || target.j >= spec_.n_stocks() || target.i == target.j)
                throw UsageError("synth: correlation target must name two distinct stocks");
            if (!(target.tau0 > 0.0) || !(target.gamma > 0.0) || !std::isfinite(target.theta))
                throw UsageError("synth: correlation target needs positive tau0, gamma");
            const auto& si = spec_.stocks[target.i];
            const auto& sj = spec_.stocks[target.j];
            if (si.p_trade != sj.p_trade || si.p_buy != 0.5 || sj.p_buy != 0.5)
                throw UsageError("synth: target pairs need equal p_trade and p_buy = 0.5");
            const double p = si.p_trade;
            const double rho1 = cauchy_correlation(target.tau0, target.gamma, 1.0);
            const double achievable = calibration->lookup(p, rho1) / rho1;
            const auto r = calibration->inverse(p, std::abs(target.theta) * rho1);
            if (!r || *r > rho1)
                throw NumericError("synth: requested theta " + detail::format_double(target.theta) +
                                   " exceeds the achievable bound " + detail::format_double(achievable) +
                                   " for tau0=" + detail::format_double(target.tau0) +
                                   ", gamma=" + detail::format_double(target.gamma));
            const double kappa = *r / rho1;
            LatentFactor f;
            f.tau0 = target.tau0;
            f.gamma = target.gamma;
            f.loadings.assign(spec_.n_stocks(), 0.0);
            f.loadings[target.i] = (target.theta < 0 ? -1.0 : 1.0) * std::sqrt(kappa);
            f.loadings[target.j] = std::sqrt(kappa);
            factors_.push_back(std::move(f));
            resolutions_.push_back({target, kappa, achievable});
        }
    }

    void check_loadings() {
        const std::size_t n = spec_.n_stocks();
        residual_.assign(n, 1.0);
        cut_up_.assign(n, 0.0);
        cut_down_.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double total = 0.0;
            for (const auto& f : factors_) total += f.loadings[i] * f.loadings[i];
            if (total > 1.0 + 1e-12)
                throw UsageError("synth: latent loadings of " + spec_.stocks[i].symbol +
                                 " exceed unit variance");
            residual_[i] = std::sqrt(std::max(0.0, 1.0 - total));
            const auto& s = spec_.stocks[i];
            cut_up_[i] = upper_normal_quantile(s.p_trade * s.p_buy);
            cut_down_[i] = upper_normal_quantile(s.p_trade * (1.0 - s.p_buy));
        }
    }

    /// Circulant embedding of the factor autocovariance; negative eigenvalues
    /// (possible for slowly decaying covariances) are clipped to zero.
    void prepare_factors() {
        if (spec_.sign_model != SignModel::latent_factor) return;
        const auto slots = static_cast<std::size_t>(spec_.grid.slots());
        std::size_t m = 2;
        while (m < 2 * slots) m *= 2;
        Eigen::FFT<double> fft;
        for (const auto& f : factors_) {
            std::vector<double> c(m);
            for (std::size_t k = 0; k < m; ++k)
                c[k] = cauchy_correlation(f.tau0, f.gamma, static_cast<double>(std::min(k, m - k)));
            std::vector<std::complex<double>> lambda;
            fft.fwd(lambda, c);
            std::vector<double> scale(m);
            for (std::size_t k = 0; k < m; ++k)
                scale[k] = std::sqrt(std::max(0.0, lambda[k].real()) / static_cast<double>(m));
            spectra_.push_back(std::move(scale));
        }
    }

    std::vector<double> latent_path(int d, std::size_t f) const {
        const auto& scale = spectra_[f];
        const std::size_t m = scale.size();
        PhiloxStream rng(spec_.seed, static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(f),
                         static_cast<std::uint32_t>(StreamPurpose::latent));
        std::vector<std::complex<double>> w(m), y;
        for (std::size_t k = 0; k < m; ++k) {
            const double re = rng.normal();
            const double im = rng.normal();
            w[k] = {scale[k] * re, scale[k] * im};
        }
        Eigen::FFT<double> fft;
        fft.SetFlag(Eigen::FFT<double>::Unscaled);
        fft.fwd(y, w);
        std::vector<double> out(static_cast<std::size_t>(spec_.grid.slots()));
        for (std::size_t t = 0; t < out.size(); ++t) out[t] = y[t].real();
        return out;
    }

    void iid_signs(int d, std::size_t i, std::vector<Sign>& out) const {
        const auto& s = spec_.stocks[i];
        PhiloxStream rng(spec_.seed, static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(i),
                         static_cast<std::uint32_t>(StreamPurpose::signs));
        const double up = s.p_trade * s.p_buy;
        for (auto& v : out) {
            const double u = rng.uniform();
            v = u < up ? Sign{1} : (u < s.p_trade ? Sign{-1} : Sign{0});
        }
    }

    void latent_signs(int d, std::size_t i, const std::vector<std::vector<double>>& paths,
                      std::vector<Sign>& out) const {
        PhiloxStream rng(spec_.seed, static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(i),
                         static_cast<std::uint32_t>(StreamPurpose::signs));
        for (std::size_t t = 0; t < out.size(); ++t) {
            double u = residual_[i] * rng.normal();
            for (std::size_t f = 0; f < factors_.size(); ++f) u += factors_[f].loadings[i] * paths[f][t];
            out[t] = u > cut_up_[i] ? Sign{1} : (u < -cut_down_[i] ? Sign{-1} : Sign{0});
        }
    }

    /// ln m(t) = ln m₀ + Σ_{u<=t} σ η(u) + Σ_{s<t} G(t − s) d(s).
    void prices(int d, std::size_t i, const std::vector<double>& driver, std::vector<double>& bid,
                std::vector<double>& ask) const {
        const auto& s = spec_.stocks[i];
        PhiloxStream rng(spec_.seed, static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(i),
                         static_cast<std::uint32_t>(StreamPurpose::returns));
        const auto& terms = spec_.kernel.terms;
        std::vector<double> state(terms.size(), 0.0);
        const double x0 = std::log(s.price0);
        double walk = 0.0;
        for (std::size_t t = 0; t < driver.size(); ++t) {
            if (t > 0) {
                walk += s.noise_sigma * rng.normal();
                for (std::size_t m = 0; m < terms.size(); ++m)
                    state[m] = terms[m].decay * (state[m] + driver[t - 1]);
            }
            double impact = 0.0;
            for (std::size_t m = 0; m < terms.size(); ++m) impact += terms[m].weight * state[m];
            const double mid = std::exp(x0 + walk + impact);
            bid[t] = mid * (1.0 - spec_.half_spread);
            ask[t] = mid * (1.0 + spec_.half_spread);
        }
    }
};

/// Stocks named S01, S02, ... with shared parameters, for quick specs.
inline std::vector<SynthStock> uniform_stocks(std::size_t n, double p_trade, double p_buy = 0.5,
                                              double noise_sigma = 1e-4) {
    std::vector<SynthStock> out;
    const int width = n >= 100 ? 3 : 2;
    for (std::size_t k = 0; k < n; ++k) {
        std::string name = std::to_string(k + 1);
        name.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(name.size()))), '0');
        out.push_back({"S" + name, "", p_trade, p_buy, noise_sigma, 100.0});
    }
    return out;
}

}  // namespace crossimpact
