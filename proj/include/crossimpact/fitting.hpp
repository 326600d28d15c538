#pragma once

// Power-law fit Θ(τ) = ϑ / (1 + (τ/τ⁰)²)^(γ/2) with the normalized χ²
// (sum of squared residuals over M − M_P degrees of freedom).

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crossimpact/errors.hpp"
#include "crossimpact/response.hpp"

namespace crossimpact {

inline double power_law_eval(double theta, double tau0, double gamma, double tau) {
    if (!(tau0 > 0.0)) throw std::domain_error("power_law_eval: tau0 must be positive");
    const double u = (tau / tau0) * (tau / tau0);
    return theta * std::exp(-0.5 * gamma * std::log1p(u));
}

inline double normalized_chi2(std::span<const double> model, std::span<const double> data,
                              std::size_t n_params = 3) {
    if (model.size() != data.size()) throw UsageError("normalized_chi2: length mismatch");
    if (data.size() <= n_params)
        throw NumericError("normalized_chi2: need more data points than parameters");
    double ssr = 0.0;
    for (std::size_t m = 0; m < data.size(); ++m) {
        const double r = model[m] - data[m];
        ssr += r * r;
    }
    return ssr / static_cast<double>(data.size() - n_params);
}

struct FitBounds {
    double tau0_min = 1e-3;
    double tau0_max = 1e3;
    double gamma_min = 0.1;
    double gamma_max = 3.0;
    int tau0_points = 25;   // logarithmic
    int gamma_points = 25;  // linear
    int refine_seeds = 5;
    int max_iterations = 1000;
};

struct FitResult {
    double theta = 0.0;
    double tau0 = 0.0;
    double gamma = 0.0;
    double chi2 = 0.0;
    std::size_t n_points = 0;
    std::size_t n_params = 3;
    /// False when the data cannot pin down (τ⁰, γ): all-zero data or a
    /// solution sitting on a bound.
    bool identifiable = true;
    /// χ² of the best grid seed before refinement.
    double seed_chi2 = 0.0;

    /// Exponents below one are conventionally called long memory.
    std::string memory_class() const { return gamma < 1.0 ? "long" : "short"; }

    double operator()(double tau) const { return power_law_eval(theta, tau0, gamma, tau); }
};

namespace detail {

struct PowerLawProblem {
    std::span<const double> tau;
    std::span<const double> y;

    // Parameters: theta, s = ln tau0, gamma.
    double ssr(const Eigen::Vector3d& p) const {
        double acc = 0.0;
        for (std::size_t m = 0; m < y.size(); ++m) {
            const double r = power_law_eval(p[0], std::exp(p[1]), p[2], tau[m]) - y[m];
            acc += r * r;
        }
        return acc;
    }

    void linearize(const Eigen::Vector3d& p, Eigen::MatrixXd& jac, Eigen::VectorXd& res) const {
        const auto n = static_cast<Eigen::Index>(y.size());
        jac.resize(n, 3);
        res.resize(n);
        const double inv_tau0_sq = std::exp(-2.0 * p[1]);
        for (Eigen::Index m = 0; m < n; ++m) {
            const double t = tau[static_cast<std::size_t>(m)];
            const double u = t * t * inv_tau0_sq;
            const double l = std::log1p(u);
            const double g = std::exp(-0.5 * p[2] * l);
            res[m] = p[0] * g - y[static_cast<std::size_t>(m)];
            jac(m, 0) = g;
            jac(m, 1) = p[0] * p[2] * g * u / (1.0 + u);
            jac(m, 2) = -0.5 * p[0] * g * l;
        }
    }
};

/// Levenberg–Marquardt with Marquardt scaling; (s, γ) are kept inside their
/// bounds by projection. Never returns a point worse than the start.
inline Eigen::Vector3d refine(const PowerLawProblem& prob, Eigen::Vector3d p,
                              const FitBounds& b) {
    const double s_lo = std::log(b.tau0_min), s_hi = std::log(b.tau0_max);
    auto project = [&](Eigen::Vector3d q) {
        q[1] = std::clamp(q[1], s_lo, s_hi);
        q[2] = std::clamp(q[2], b.gamma_min, b.gamma_max);
        return q;
    };
    Eigen::MatrixXd jac;
    Eigen::VectorXd res;
    prob.linearize(p, jac, res);
    double cost = res.squaredNorm();
    double lambda = 1e-3;
    for (int it = 0; it < b.max_iterations && cost > 0.0; ++it) {
        Eigen::Vector3d scale = jac.colwise().squaredNorm().transpose();
        for (int k = 0; k < 3; ++k) scale[k] = std::max(scale[k], 1e-300);
        bool accepted = false;
        while (lambda < 1e20) {
            const auto n = jac.rows();
            Eigen::MatrixXd aug(n + 3, 3);
            Eigen::VectorXd rhs(n + 3);
            aug.topRows(n) = jac;
            aug.bottomRows(3) = (lambda * scale).cwiseSqrt().asDiagonal();
            rhs.head(n) = -res;
            rhs.tail(3).setZero();
            const Eigen::Vector3d step = aug.colPivHouseholderQr().solve(rhs);
            const Eigen::Vector3d trial = project(p + step);
            const double trial_cost = prob.ssr(trial);
            if (std::isfinite(trial_cost) && trial_cost < cost) {
                const bool tiny =
                    ((trial - p).cwiseAbs().array() <= 1e-15 * (p.cwiseAbs().array() + 1e-300))
                        .all();
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 3.0, 1e-15);
                accepted = !tiny;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) break;
        prob.linearize(p, jac, res);
    }
    return p;
}

}  // namespace detail

/// Least-squares fit over points (τ_m, y_m). For each (τ⁰, γ) on a log×linear
/// grid the amplitude ϑ has a closed form; the best grid points seed
/// Levenberg–Marquardt and the best refined candidate wins.
inline FitResult fit_power_law(std::span<const double> tau, std::span<const double> y,
                               const FitBounds& bounds = {}) {
    if (tau.size() != y.size()) throw UsageError("fit_power_law: length mismatch");
    if (y.size() < 4) throw NumericError("fit_power_law: need at least 4 defined points");
    if (!(bounds.tau0_min > 0.0) || bounds.tau0_max <= bounds.tau0_min ||
        !(bounds.gamma_min > 0.0) || bounds.gamma_max <= bounds.gamma_min ||
        bounds.tau0_points < 2 || bounds.gamma_points < 2 || bounds.refine_seeds < 1)
        throw UsageError("fit_power_law: invalid bounds");
    for (std::size_t m = 0; m < y.size(); ++m)
        if (!std::isfinite(tau[m]) || !std::isfinite(y[m]))
            throw NumericError("fit_power_law: non-finite data");

    const detail::PowerLawProblem prob{tau, y};
    const std::size_t dof = y.size() - 3;

    struct Seed {
        double ssr;
        Eigen::Vector3d p;
    };
    std::vector<Seed> seeds;
    std::vector<double> g(y.size());
    const double s_lo = std::log(bounds.tau0_min), s_hi = std::log(bounds.tau0_max);
    for (int a = 0; a < bounds.tau0_points; ++a) {
        const double s = s_lo + (s_hi - s_lo) * a / (bounds.tau0_points - 1);
        for (int c = 0; c < bounds.gamma_points; ++c) {
            const double gamma =
                bounds.gamma_min + (bounds.gamma_max - bounds.gamma_min) * c / (bounds.gamma_points - 1);
            double gy = 0.0, gg = 0.0;
            for (std::size_t m = 0; m < y.size(); ++m) {
                g[m] = power_law_eval(1.0, std::exp(s), gamma, tau[m]);
                gy += g[m] * y[m];
                gg += g[m] * g[m];
            }
            const double theta = gg > 0.0 ? gy / gg : 0.0;
            double ssr = 0.0;
            for (std::size_t m = 0; m < y.size(); ++m) {
                const double r = theta * g[m] - y[m];
                ssr += r * r;
            }
            seeds.push_back({ssr, Eigen::Vector3d(theta, s, gamma)});
        }
    }
    std::stable_sort(seeds.begin(), seeds.end(),
                     [](const Seed& l, const Seed& r) { return l.ssr < r.ssr; });

    FitResult out;
    out.n_points = y.size();
    out.seed_chi2 = seeds.front().ssr / static_cast<double>(dof);

    Eigen::Vector3d best = seeds.front().p;
    double best_ssr = seeds.front().ssr;
    const bool all_zero = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
    if (!all_zero) {
        const auto n_refine = std::min<std::size_t>(static_cast<std::size_t>(bounds.refine_seeds),
                                                    seeds.size());
        for (std::size_t k = 0; k < n_refine; ++k) {
            const Eigen::Vector3d p = detail::refine(prob, seeds[k].p, bounds);
            const double ssr = prob.ssr(p);
            if (ssr < best_ssr) {
                best_ssr = ssr;
                best = p;
            }
        }
    }

    out.theta = best[0];
    out.tau0 = std::exp(best[1]);
    out.gamma = best[2];
    out.chi2 = best_ssr / static_cast<double>(dof);
    auto at_bound = [](double v, double lo, double hi) {
        return std::abs(v - lo) <= 1e-9 * std::max(1.0, std::abs(lo)) ||
               std::abs(v - hi) <= 1e-9 * std::max(1.0, std::abs(hi));
    };
    out.identifiable = !all_zero && !at_bound(best[1], s_lo, s_hi) &&
                       !at_bound(best[2], bounds.gamma_min, bounds.gamma_max);
    return out;
}

/// Fits the defined points of a curve, using its lags as τ.
inline FitResult fit_power_law(const LagCurve& curve, const FitBounds& bounds = {}) {
    std::vector<double> tau, y;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        if (!curve.defined(k)) continue;
        tau.push_back(curve.lags[k]);
        y.push_back(curve.values[k]);
    }
    return fit_power_law(tau, y, bounds);
}

}  // namespace crossimpact
