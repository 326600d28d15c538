#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crossimpact/fitting.hpp"

using namespace crossimpact;

namespace {

struct Curve {
    std::vector<double> tau, y;
};

Curve sample(double theta, double tau0, double gamma, int max_tau = 1000) {
    Curve c;
    for (int t = 1; t <= max_tau; ++t) {
        c.tau.push_back(t);
        c.y.push_back(power_law_eval(theta, tau0, gamma, t));
    }
    return c;
}

}  // namespace

TEST(PowerLaw, Evaluation) {
    EXPECT_EQ(power_law_eval(0.46, 0.05, 1.0, 0.0), 0.46);
    EXPECT_NEAR(power_law_eval(0.46, 0.05, 1.0, 0.05), 0.46 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(power_law_eval(0.46, 0.05, 1.0, 0.05), 0.32527, 1e-5);
    const double far = power_law_eval(0.46, 0.05, 1.0, 1000 * 0.05);
    EXPECT_NEAR(far / (0.46 * std::pow(1000.0, -1.0)), 1.0, 1e-5);
    EXPECT_THROW(power_law_eval(1, 0, 1, 1), std::domain_error);
    EXPECT_THROW(power_law_eval(1, -2, 1, 1), std::domain_error);
}

TEST(PowerLaw, EvenAndDecreasing) {
    double prev = power_law_eval(0.4, 2.0, 0.7, 0.0);
    for (double t = 0.25; t < 100; t += 0.25) {
        const double v = power_law_eval(0.4, 2.0, 0.7, t);
        EXPECT_LT(v, prev);
        EXPECT_EQ(v, power_law_eval(0.4, 2.0, 0.7, -t));
        prev = v;
    }
}

TEST(Chi2, HandComputations) {
    std::vector<double> y{1, 2, 3, 4, 5};
    EXPECT_EQ(normalized_chi2(y, y), 0.0);
    std::vector<double> f{1.1, 2.1, 3.1, 4.1, 5.1};
    EXPECT_NEAR(normalized_chi2(f, y), 0.025, 1e-15);
    std::vector<double> z{0, 0, 0, 0}, one{1, 0, 0, 0};
    EXPECT_EQ(normalized_chi2(one, z), 1.0);
    std::vector<double> three{0, 0, 0};
    EXPECT_THROW(normalized_chi2(three, three), NumericError);
}

TEST(Fit, NoiselessRoundTrip) {
    auto c = sample(0.61, 0.06, 1.04);
    auto r = fit_power_law(c.tau, c.y);
    EXPECT_NEAR(r.theta / 0.61, 1.0, 1e-3);
    EXPECT_NEAR(r.tau0 / 0.06, 1.0, 1e-3);
    EXPECT_NEAR(r.gamma / 1.04, 1.0, 1e-3);
    EXPECT_LT(r.chi2, 1e-20);
    EXPECT_EQ(r.n_points, 1000u);
    EXPECT_EQ(r.memory_class(), "short");
    EXPECT_TRUE(r.identifiable);
    EXPECT_EQ(r(0.0), r.theta);
}

TEST(Fit, LongMemoryLabel) {
    auto c = sample(0.3, 5.0, 0.6);
    auto r = fit_power_law(c.tau, c.y);
    EXPECT_NEAR(r.gamma, 0.6, 1e-4);
    EXPECT_EQ(r.memory_class(), "long");
}

TEST(Fit, ConstantCurve) {
    Curve c;
    for (int t = 1; t <= 50; ++t) c.tau.push_back(t), c.y.push_back(0.2);
    auto r = fit_power_law(c.tau, c.y);
    // Flat data sit on the tau0 bound, so the fit is only as flat as the bound allows.
    EXPECT_NEAR(r.theta, 0.2, 1e-4);
    EXPECT_LT(r.chi2, 1e-8 * 0.2 * 0.2);
    EXPECT_TRUE(!r.identifiable || r.gamma <= 0.1 + 1e-6);
}

TEST(Fit, AllZeroCurve) {
    std::vector<double> tau{1, 2, 3, 4, 5}, y(5, 0.0);
    auto r = fit_power_law(tau, y);
    EXPECT_EQ(r.theta, 0.0);
    EXPECT_FALSE(r.identifiable);
    EXPECT_EQ(r.chi2, 0.0);
}

TEST(Fit, TooFewPoints) {
    std::vector<double> tau{1, 2, 3}, y{0.3, 0.2, 0.1};
    EXPECT_THROW(fit_power_law(tau, y), NumericError);
}

TEST(Fit, RefinementNeverWorsensTheSeed) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z(0.0, 0.01);
    auto c = sample(0.45, 0.07, 1.0, 200);
    for (auto& v : c.y) v += z(rng);
    auto r = fit_power_law(c.tau, c.y);
    EXPECT_LE(r.chi2, r.seed_chi2);
}

TEST(Fit, ScalingDataScalesTheta) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> z(0.0, 0.002);
    auto c = sample(0.3, 0.5, 0.8, 300);
    for (auto& v : c.y) v += z(rng);
    auto a = fit_power_law(c.tau, c.y);
    auto s = c;
    for (auto& v : s.y) v *= 4.0;
    auto b = fit_power_law(s.tau, s.y);
    EXPECT_NEAR(b.theta / a.theta, 4.0, 1e-5);
    EXPECT_NEAR(b.chi2 / a.chi2, 16.0, 1e-4);
    EXPECT_NEAR(b.tau0 / a.tau0, 1.0, 1e-5);
    EXPECT_NEAR(b.gamma / a.gamma, 1.0, 1e-5);
}

TEST(Fit, SkipsMissingPointsOfACurve) {
    LagCurve c;
    for (int t = 1; t <= 100; ++t) {
        c.lags.push_back(t);
        c.values.push_back(t % 10 == 0 ? kMissing : power_law_eval(0.2, 3.0, 1.5, t));
    }
    auto r = fit_power_law(c);
    EXPECT_EQ(r.n_points, 90u);
    EXPECT_NEAR(r.gamma, 1.5, 1e-6);
}
