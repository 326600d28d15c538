#include <gtest/gtest.h>

#include <random>

#include "crossimpact/series.hpp"

using namespace crossimpact;

namespace {

std::vector<TradeEvent> trades_at(std::vector<double> prices, SecondOfDay start = 35000) {
    std::vector<TradeEvent> out;
    for (std::size_t n = 0; n < prices.size(); ++n)
        out.push_back({start + static_cast<SecondOfDay>(n), 1, prices[n], 100});
    return out;
}

std::vector<Sign> signs_of(const std::vector<double>& prices) {
    return classify_trade_signs(trades_at(prices)).signs;
}

}  // namespace

TEST(Signing, TickRuleExamples) {
    EXPECT_EQ(signs_of({10.00, 10.01, 10.01, 10.00}), (std::vector<Sign>{0, 1, 1, -1}));
    EXPECT_EQ(signs_of({5.00}), (std::vector<Sign>{0}));
    EXPECT_EQ(signs_of({7.00, 7.00, 7.01}), (std::vector<Sign>{0, 0, 1}));
    EXPECT_EQ(classify_trade_signs(trades_at({7.00, 7.00, 7.01})).undefined_prefix, 2u);
}

TEST(Signing, CarryInSignsTheOpeningTrades) {
    auto s = classify_trade_signs(trades_at({7.00, 7.00, 6.99}), CarryPolicy::carry_in(1));
    EXPECT_EQ(s.signs, (std::vector<Sign>{1, 1, -1}));
    EXPECT_EQ(s.undefined_prefix, 0u);
}

TEST(Signing, SecondSignIsSignOfSum) {
    IntradayGrid g;
    const SecondOfDay t0 = g.open_second;
    std::vector<TradeEvent> trades{{t0, 1, 10, 1}, {t0, 2, 10, 1}, {t0, 3, 10, 1},
                                   {t0 + 2, 1, 10, 1}, {t0 + 2, 2, 10, 1}};
    TradeSignSeries ts{{1, 1, -1, 1, -1}, 0};
    auto s = aggregate_second_signs(ts, trades, g);
    ASSERT_EQ(s.slots(), 22200);
    EXPECT_EQ(s.values[0], 1);
    EXPECT_EQ(s.values[1], 0);  // no trades
    EXPECT_EQ(s.values[2], 0);  // balanced
}

TEST(Signing, TradesOutsideTheGridAreIgnored) {
    IntradayGrid g{100, 103};
    std::vector<TradeEvent> trades{{99, 1, 10, 1}, {103, 1, 10, 1}};
    auto s = aggregate_second_signs({{1, 1}, 0}, trades, g);
    EXPECT_EQ(s.values, (std::vector<Sign>{0, 0, 0}));
}

TEST(Signing, NegatingPriceMovesNegatesSigns) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> step(-2, 2);
    std::vector<double> up{50.0}, down{50.0};
    for (int n = 0; n < 500; ++n) {
        const int s = step(rng);
        up.push_back(up.back() + 0.01 * s);
        down.push_back(down.back() - 0.01 * s);
    }
    auto a = signs_of(up), b = signs_of(down);
    for (std::size_t n = 0; n < a.size(); ++n) EXPECT_EQ(a[n], -b[n]);
}

TEST(Signing, SignsAreCausal) {
    std::vector<double> prices{10, 10.01, 10.0, 10.0, 10.02, 10.02, 10.01};
    auto full = signs_of(prices);
    for (std::size_t cut = 1; cut < prices.size(); ++cut) {
        auto part = signs_of({prices.begin(), prices.begin() + static_cast<std::ptrdiff_t>(cut)});
        for (std::size_t n = 0; n < cut; ++n) EXPECT_EQ(part[n], full[n]);
    }
}

TEST(Signing, DefinedSignsAreUnitAfterFirstChange) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> step(-1, 1);
    std::vector<double> p{20.0};
    for (int n = 0; n < 1000; ++n) p.push_back(p.back() + 0.01 * step(rng));
    auto s = classify_trade_signs(trades_at(p));
    for (std::size_t n = s.undefined_prefix; n < s.signs.size(); ++n)
        EXPECT_TRUE(s.signs[n] == 1 || s.signs[n] == -1);
}

TEST(Signing, CountSigns) {
    SignSeries s{"X", {}, {1, 0, -1, 1, 0}};
    auto c = count_signs(s);
    EXPECT_EQ(c.buy_seconds, 2u);
    EXPECT_EQ(c.sell_seconds, 1u);
    EXPECT_EQ(c.zero_seconds, 2u);
}

TEST(Signing, ProcessDayClipsBeforeSigning) {
    IntradayGrid g{1000, 1005};
    TickDay d{"X", {}, {}, {}};
    d.trades = {{990, 1, 10.0, 1}, {1000, 1, 10.01, 1}, {1001, 1, 10.0, 1}};
    d.quotes = {{1000, 1, 10.0, 10.02}};
    auto s = process_day(d, g);
    EXPECT_TRUE(s.trading_day);
    // The pre-open trade is dropped, so the first in-grid trade stays unsigned.
    EXPECT_EQ(s.signs.values, (std::vector<Sign>{0, -1, 0, 0, 0}));
}
