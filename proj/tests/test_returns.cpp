#include <gtest/gtest.h>

#include <cmath>

#include "crossimpact/returns.hpp"

using namespace crossimpact;

TEST(Returns, ForwardFill) {
    IntradayGrid g{100, 103};
    std::vector<QuoteEvent> q{{100, 1, 10, 12}};
    auto m = build_midpoints(q, g);
    EXPECT_EQ(m.values, (std::vector<double>{11, 11, 11}));
    EXPECT_EQ(m.first_defined_slot, 0);
}

TEST(Returns, LastQuoteWithinSecondWins) {
    IntradayGrid g{100, 102};
    std::vector<QuoteEvent> q{{100, 1, 9, 9.5}, {100, 2, 10, 10.02}};
    auto m = build_midpoints(q, g);
    EXPECT_DOUBLE_EQ(m.values[0], 10.01);
}

TEST(Returns, NoQuotesIsFullyMissing) {
    IntradayGrid g{100, 104};
    auto m = build_midpoints({}, g);
    EXPECT_TRUE(m.fully_missing());
    for (double v : m.values) EXPECT_TRUE(is_missing(v));
}

TEST(Returns, MissingUntilFirstQuote) {
    IntradayGrid g{100, 104};
    std::vector<QuoteEvent> q{{102, 1, 10, 10}};
    auto m = build_midpoints(q, g);
    EXPECT_EQ(m.first_defined_slot, 2);
    EXPECT_TRUE(is_missing(m.values[1]));
    EXPECT_FALSE(log_return(m, 1, 1).has_value());
    EXPECT_DOUBLE_EQ(*log_return(m, 2, 1), 0.0);
}

TEST(Returns, LogReturnExamples) {
    MidpointSeries m{"X", {}, {100, 101, 100}, 0};
    EXPECT_NEAR(*log_return(m, 0, 1), 0.0099503, 1e-7);
    EXPECT_EQ(*log_return(m, 0, 2), 0.0);
    EXPECT_FALSE(log_return(m, 1, 2).has_value());
}

TEST(Returns, AdditiveOverAdjacentIntervals) {
    MidpointSeries m{"X", {}, {100, 101.3, 99.2, 104.7, 103.1}, 0};
    for (int a = 1; a < 3; ++a)
        EXPECT_NEAR(*log_return(m, 0, a) + *log_return(m, a, 4 - a), *log_return(m, 0, 4), 1e-15);
}

TEST(Returns, InvariantUnderPriceScaling) {
    MidpointSeries m{"X", {}, {100, 101.3, 99.2, 104.7}, 0};
    MidpointSeries s = m;
    for (auto& v : s.values) v *= 37.5;
    for (int t = 0; t < 3; ++t) EXPECT_NEAR(*log_return(m, t, 1), *log_return(s, t, 1), 1e-14);
}
