#include <gtest/gtest.h>

#include <cmath>

#include "gpvol/errors.hpp"
#include "gpvol/hedging.hpp"
#include "gpvol/synthmarket.hpp"

using namespace gpvol;

namespace {

const Date kStart = parse_date("2003-01-02");

HedgePath flat_path(int n, double s, double v, double v1, double k1 = 105.0) {
    HedgePath p;
    p.id = "flat";
    p.strike = 100;
    p.companion_strike = k1;
    p.expiry = add_days(kStart, 200);
    for (int i = 0; i < n; ++i) p.points.push_back({add_days(kStart, i), s, 0.0, v, v1});
    return p;
}

double mean_error(Strategy s, int freq, int paths, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    HedgeScenario sc;
    sc.sigma = sigma;
    sc.rate = 0.01;
    double sum = 0.0;
    for (int i = 0; i < paths; ++i) {
        const HedgePath p = make_hedge_path(sc, rng);
        const HedgePath sub = subsample(p, stride_for(p, freq));
        const HedgeOutcome o = run_strategy(sub, s, VolSource::gp_model(make_constant(sigma)));
        sum += *option_error({o.abs_error(), o.dates, sub.points[0].value, sub.points[0].rate, sub.tau_at(0)});
    }
    return sum / paths;
}

}  // namespace

TEST(HedgeFactors, BsImpliedRecoversTheGreeks) {
    const double p = bs::price({100, 95, 0.01, 0.5, 0.2, OptionKind::Call});
    const HedgeFactors f = hedge_factors(VolSource::bs_implied(), 100, 95, 0.01, 0.5, OptionKind::Call, p);
    const bs::Greeks g = bs::greeks({100, 95, 0.01, 0.5, 0.2, OptionKind::Call});
    EXPECT_NEAR(f.sigma, 0.2, 1e-10);
    EXPECT_NEAR(f.delta, g.delta, 1e-10);
    const HedgeFactors c = hedge_factors(VolSource::gp_model(make_constant(0.2)), 100, 95, 0.01, 0.5,
                                         OptionKind::Call, p);
    EXPECT_EQ(c.delta, g.delta);
    EXPECT_EQ(c.gamma, g.gamma);
    EXPECT_EQ(c.vega, g.vega);
}

TEST(HedgeFactors, BuiltinCallModelGivesPointTwo) {
    const HedgeFactors f =
        hedge_factors(VolSource::gp_model(builtin_call_model()), 100, 100, 0.0, 0.25, OptionKind::Call, 5.0);
    EXPECT_NEAR(f.sigma, 0.2, 1e-15);
}

TEST(HedgeFactors, GpVolatilityIsFloored) {
    const HedgeFactors f =
        hedge_factors(VolSource::gp_model(make_constant(-3.0)), 100, 100, 0.0, 0.25, OptionKind::Call, 5.0);
    EXPECT_EQ(f.sigma, kGpVolFloor);
}

TEST(Delta, ZeroLengthHorizon) {
    const HedgeOutcome o = run_delta(flat_path(1, 100, 5, 3), VolSource::gp_model(make_constant(0.2)));
    EXPECT_EQ(o.terminal, 0.0);
    EXPECT_EQ(o.initial, 0.0);
}

TEST(Delta, NothingMovesNothingLost) {
    const HedgeOutcome o = run_delta(flat_path(30, 100, 5, 3), VolSource::gp_model(make_constant(0.2)));
    EXPECT_EQ(o.initial, 0.0);
    EXPECT_NEAR(o.terminal, 0.0, 1e-12);
}

TEST(TwoInstrument, IdenticalCompanionIsPerfectOffset) {
    HedgePath p = flat_path(20, 100, 5, 5, 100.0);
    Rng rng(3);
    for (auto& pt : p.points) {
        pt.spot = 100 * std::exp(0.05 * rng.normal());
        pt.value = pt.companion_value = 1 + rng.uniform();
    }
    for (Strategy s : {Strategy::DeltaGamma, Strategy::DeltaVega}) {
        const HedgeOutcome o = run_strategy(p, s, VolSource::gp_model(make_constant(0.3)));
        for (double y : o.companion_units) EXPECT_EQ(y, -1.0);
        for (double x : o.underlying_units) EXPECT_EQ(x, 0.0);
        EXPECT_EQ(o.terminal, 0.0);
    }
}

TEST(TwoInstrument, NeutralityResiduals) {
    Rng rng(5);
    HedgeScenario sc;
    sc.rate = 0.02;
    for (int i = 0; i < 20; ++i) {
        const HedgePath p = make_hedge_path(sc, rng);
        for (Strategy s : {Strategy::Delta, Strategy::DeltaGamma, Strategy::DeltaVega}) {
            const HedgeOutcome o = run_strategy(p, s, VolSource::bs_implied());
            EXPECT_EQ(o.initial, 0.0);
            for (double r : o.delta_residual) EXPECT_LE(std::abs(r), 1e-12);
            for (double r : o.second_residual) EXPECT_LE(std::abs(r), 1e-12);
        }
    }
}

TEST(TwoInstrument, VegaAndGammaPickTheSameRatio) {
    Rng rng(7);
    const HedgePath p = make_hedge_path({}, rng);
    const VolSource src = VolSource::gp_model(make_constant(0.2));
    const HedgeOutcome g = run_delta_gamma(p, src);
    const HedgeOutcome v = run_delta_vega(p, src);
    ASSERT_EQ(g.companion_units.size(), v.companion_units.size());
    for (std::size_t i = 0; i < g.companion_units.size(); ++i) {
        EXPECT_NEAR(g.companion_units[i], v.companion_units[i], 1e-10);
    }
}

TEST(TwoInstrument, DegenerateCompanionNamesTheDate) {
    HedgePath p = flat_path(5, 100, 5, 1e-9, 400.0);
    try {
        run_delta_gamma(p, VolSource::gp_model(make_constant(0.01)));
        FAIL();
    } catch (const DegenerateHedgeError& e) {
        EXPECT_NE(std::string(e.what()).find("2003-01-02"), std::string::npos);
    }
    EXPECT_THROW(run_delta_vega(p, VolSource::gp_model(make_constant(0.01))), DegenerateHedgeError);
}

TEST(TrackingError, Examples) {
    EXPECT_DOUBLE_EQ(*option_error({1.0, 10, 2.0, 0.0, 1.0}), 0.05);
    EXPECT_FALSE(option_error({1.0, 10, 0.0, 0.0, 1.0}).has_value());
    const std::vector<ErrorSample> two{{0.01, 1, 1.0, 0.0, 1.0}, {0.03, 1, 1.0, 0.0, 1.0}};
    EXPECT_DOUBLE_EQ(tracking_error(two).mean, 0.02);
    const std::vector<ErrorSample> zeros{{0.0, 5, 1.0, 0.05, 1.0}, {0.0, 7, 2.0, 0.05, 1.0}};
    EXPECT_EQ(tracking_error(zeros).mean, 0.0);
    const std::vector<ErrorSample> excluded{{1.0, 5, 0.0, 0.0, 1.0}};
    EXPECT_EQ(tracking_error(excluded).count, 0u);
    EXPECT_EQ(tracking_error(excluded).excluded, 1u);
    EXPECT_DOUBLE_EQ(*option_error({1.0, 1, 1.0, 0.05, 2.0}), std::exp(-0.1));
}

TEST(Subsample, KeepsEndpoints) {
    const HedgePath p = flat_path(10, 100, 5, 3);
    EXPECT_EQ(stride_for(p, 7), 7u);
    HedgePath t = p;
    t.spacing = Spacing::Trading;
    EXPECT_EQ(stride_for(t, 7), 5u);
    EXPECT_EQ(stride_for(t, 1), 1u);
    const HedgePath s = subsample(p, 4);
    ASSERT_EQ(s.points.size(), 4u);
    EXPECT_EQ(s.points[2].date, p.points[8].date);
    EXPECT_EQ(s.points[3].date, p.points[9].date);
    EXPECT_EQ(subsample(p, 3).points.size(), 4u);
}

TEST(MonteCarlo, LessFrequentRebalancingHedgesWorse) {
    const double daily = mean_error(Strategy::Delta, 1, 200, 0.2, 11);
    const double weekly = mean_error(Strategy::Delta, 7, 200, 0.2, 11);
    EXPECT_LT(daily, weekly);
    EXPECT_LT(daily, 0.05);
    EXPECT_LT(mean_error(Strategy::DeltaGamma, 7, 200, 0.2, 11), weekly);
}

TEST(ModelEquivalence, ExactVolTreeMatchesBs) {
    Rng rng(13);
    for (int i = 0; i < 10; ++i) {
        const HedgePath p = make_hedge_path({}, rng);
        for (Strategy s : {Strategy::Delta, Strategy::DeltaGamma, Strategy::DeltaVega}) {
            const double a = run_strategy(p, s, VolSource::bs_implied()).terminal;
            const double b = run_strategy(p, s, VolSource::gp_model(make_constant(0.2))).terminal;
            EXPECT_NEAR(a, b, 1e-10);
        }
    }
}

TEST(Paths, CompanionIsNearestDistinctStrikeLowerOnTies) {
    std::vector<OptionQuote> qs;
    for (int d = 0; d < 3; ++d) {
        for (double k : {90.0, 100.0, 110.0, 125.0}) {
            qs.push_back({add_days(kStart, d), add_days(kStart, 60), k, 1, 2, 100, 0.0, OptionKind::Call});
        }
    }
    const std::vector<ContractId> want{{OptionKind::Call, 100, add_days(kStart, 60)},
                                       {OptionKind::Call, 125, add_days(kStart, 60)},
                                       {OptionKind::Call, 95, add_days(kStart, 60)}};
    const PathSelection sel = build_hedge_paths(qs, want, Spacing::Trading);
    ASSERT_EQ(sel.paths.size(), 2u);
    EXPECT_EQ(sel.paths[0].companion_strike, 90);
    EXPECT_EQ(sel.paths[1].companion_strike, 110);
    EXPECT_EQ(sel.paths[0].points.size(), 3u);
    EXPECT_EQ(sel.skipped.size(), 1u);
    EXPECT_EQ(build_hedge_paths(qs, {}, Spacing::Trading).paths.size(), 4u);
}

TEST(Report, CellCountAndFormats) {
    Rng rng(17);
    std::vector<HedgePath> paths;
    for (int strike : {90, 100, 112}) {
        for (int expiry : {40, 120, 300}) {
            HedgeScenario sc;
            sc.strike = strike;
            sc.companion_strike = strike + 5;
            sc.expiry_days = expiry;
            sc.horizon_days = 30;
            paths.push_back(make_hedge_path(sc, rng));
        }
    }
    const std::optional<VolSource> gp = VolSource::gp_model(make_constant(0.21));
    const HedgeReport serial = build_report(paths, gp, {}, Execution::Serial);
    const HedgeReport parallel = build_report(paths, gp, {}, Execution::Parallel);
    EXPECT_EQ(serial.cells.size(), 108u);
    EXPECT_EQ(format_report_long(serial), format_report_long(parallel));
    for (const auto& c : serial.cells) EXPECT_GE(c.error, 0.0);
    ASSERT_EQ(serial.win_rates.size(), 1u);
    EXPECT_EQ(serial.win_rates[0].cases, 54u);

    const auto cells = parse_report_long(format_report_long(serial));
    ASSERT_EQ(cells.size(), serial.cells.size());
    EXPECT_EQ(cells[5].error, serial.cells[5].error);

    const std::string wide = format_report_wide(serial);
    EXPECT_EQ(wide.substr(0, wide.find('\n')),
              "kind,moneyness,strategy,model,1d_<60,1d_60-180,1d_>180,7d_<60,7d_60-180,7d_>180");
    EXPECT_NE(wide.find("call,all,win_rate,GP,"), std::string::npos);
}

TEST(Report, EmptyClassesAreNoted) {
    Rng rng(19);
    std::vector<HedgePath> paths{make_hedge_path({}, rng)};
    const HedgeReport r = build_report(paths, std::nullopt, {}, Execution::Serial);
    EXPECT_EQ(r.cells.size(), 6u);
    std::size_t omitted = 0;
    for (const auto& n : r.notes) omitted += n.find("rows omitted") != std::string::npos;
    EXPECT_EQ(omitted, 8u);
    EXPECT_TRUE(r.win_rates.empty());
}

TEST(Report, TiesAreNotWins) {
    std::vector<ReportCell> cells;
    ReportCell c;
    c.model = "BS";
    c.error = 0.5;
    cells.push_back(c);
    c.model = "GP";
    cells.push_back(c);
    c.frequency = 7;
    c.error = 0.1;
    cells.push_back(c);
    c.model = "BS";
    c.error = 0.2;
    cells.push_back(c);
    const auto w = win_rates(cells);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].cases, 2u);
    EXPECT_EQ(w[0].gp_wins, 1u);
}
