#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "gpvol/errors.hpp"
#include "gpvol/subsetsel.hpp"

using namespace gpvol;

TEST(UpdateWeight, EqualsBruteForceDoubleSum) {
    Rng rng(2);
    SampleStats s;
    s.records = 37;
    for (int t = 0; t < 20; ++t) {
        std::vector<double> e;
        for (std::size_t j = 0; j < s.records; ++j) e.push_back(rng.uniform() * rng.uniform());
        s.errors.push_back(e);
    }
    long double sum = 0;
    for (std::size_t j = 0; j < s.records; ++j)
        for (std::size_t t = 0; t < s.errors.size(); ++t) sum += s.errors[t][j];
    EXPECT_NEAR(update_weight(s), static_cast<double>(sum / (37.0L * 20.0L)), 1e-12);
}

TEST(UpdateWeight, EmptyIsZero) { EXPECT_EQ(update_weight({}), 0.0); }

TEST(Sss, CyclesThroughAllSamples) {
    std::size_t cur = 0;
    std::vector<std::size_t> seen{cur};
    for (int i = 0; i < 9; ++i) seen.push_back(cur = next_sss(cur, 5));
    EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1, 2, 3, 4, 0, 1, 2, 3, 4}));
}

TEST(Rss, UniformByChiSquare) {
    Rng rng(12345);
    const std::size_t k = 9;
    const int n = 10000;
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) ++counts[next_rss(k, rng)];
    const double expected = static_cast<double>(n) / k;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared dist(static_cast<double>(k - 1));
    EXPECT_LT(chi2, boost::math::quantile(dist, 0.99));
}

TEST(Reorder, DescendingAndStable) {
    EXPECT_EQ(reorder({0.1, 0.5, 0.3, 0.5}), (std::vector<std::size_t>{1, 3, 2, 0}));
}

TEST(Schedule, StaticAlwaysSame) {
    Rng rng(1);
    SubsetSchedule s({Policy::Static, 2, 4, 20}, rng);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(s.next(rng), 2u);
}

TEST(Schedule, SssStartsAtFirstSample) {
    Rng rng(1);
    SubsetSchedule s({Policy::Sss, 0, 3, 20}, rng);
    std::vector<std::size_t> seq;
    for (int i = 0; i < 6; ++i) seq.push_back(s.next(rng));
    EXPECT_EQ(seq, (std::vector<std::size_t>{0, 1, 2, 0, 1, 2}));
}

TEST(Schedule, AsssWalksPassThenReorders) {
    Rng rng(1);
    SubsetSchedule s({Policy::Asss, 0, 3, 20, 1.0}, rng);
    EXPECT_EQ(s.weights(), (std::vector<double>{1.0, 1.0, 1.0}));
    EXPECT_EQ(s.next(rng), 0u);
    s.record_weight(0, 0.2);
    EXPECT_EQ(s.next(rng), 1u);
    s.record_weight(1, 0.9);
    EXPECT_EQ(s.next(rng), 2u);
    s.record_weight(2, 0.5);
    // new pass ordered by weight: 1, 2, 0
    EXPECT_EQ(s.next(rng), 1u);
    EXPECT_EQ(s.order().front(), 1u);
}

TEST(Schedule, ArssPutsMaxWeightFirst) {
    Rng rng(77);
    SubsetSchedule s({Policy::Arss, 0, 6, 20}, rng);
    const auto& w = s.weights();
    ASSERT_EQ(w.size(), 6u);
    for (double x : w) {
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
    }
    const std::size_t argmax = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    EXPECT_EQ(s.next(rng), argmax);
}

TEST(Schedule, ReorderEachActivationSkipsJustUsed) {
    Rng rng(1);
    ScheduleOptions o{Policy::Arss, 0, 3, 20, 1.0, true, std::nullopt};
    o.initial_weights = std::vector<double>{0.3, 0.2, 0.1};
    SubsetSchedule s(o, rng);
    EXPECT_EQ(s.next(rng), 0u);
    s.record_weight(0, 5.0);
    EXPECT_EQ(s.next(rng), 1u);
}

TEST(Schedule, RejectsBadOptions) {
    Rng rng(1);
    EXPECT_THROW(SubsetSchedule({Policy::Static, 3, 3, 20}, rng), ConfigError);
    EXPECT_THROW(SubsetSchedule({Policy::Rss, 0, 0, 20}, rng), ConfigError);
    EXPECT_THROW(policy_from_string("greedy"), ConfigError);
    EXPECT_EQ(policy_from_string("arss"), Policy::Arss);
}
