#include <gtest/gtest.h>

#include <cmath>

#include "gpvol/errors.hpp"
#include "gpvol/evolution.hpp"

using namespace gpvol;

namespace {

std::vector<Record> linear_target(std::size_t n, Rng& rng) {
    std::vector<Record> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double tau = rng.uniform(0.05, 2.0);
        out.push_back({rng.uniform(0.01, 0.2), rng.uniform(0.9, 1.15), tau, 0.15 + 0.05 * tau});
    }
    return out;
}

GPConfig small_config() {
    GPConfig cfg;
    cfg.population_size = 30;
    cfg.offspring_size = 60;
    cfg.max_generations_static = 15;
    cfg.max_generations_dynamic = 23;
    cfg.generations_per_sample = 5;
    return cfg;
}

}  // namespace

TEST(Config, DefaultsAreTheStandardSettings) {
    const GPConfig cfg;
    EXPECT_EQ(cfg.population_size, 100u);
    EXPECT_EQ(cfg.offspring_size, 200u);
    EXPECT_EQ(cfg.max_generations_static, 400u);
    EXPECT_EQ(cfg.max_generations_dynamic, 1000u);
    EXPECT_EQ(cfg.tournament_size, 4u);
    EXPECT_DOUBLE_EQ(cfg.p_crossover, 0.6);
    EXPECT_DOUBLE_EQ(cfg.p_mutation(), 0.4);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, WriteParseRoundTrip) {
    GPConfig cfg = small_config();
    cfg.seed = 99;
    cfg.weight_source = WeightSource::PopulationMean;
    cfg.reorder_each_activation = true;
    cfg.execution = Execution::Serial;
    const GPConfig back = parse_config(write_config(cfg));
    EXPECT_EQ(write_config(back), write_config(cfg));
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse_config("bogus=1\n"), ConfigError);
    EXPECT_THROW(parse_config("population_size=abc\n"), ConfigError);
    EXPECT_THROW(parse_config("p_crossover=0.9\n"), ConfigError);
    EXPECT_THROW(parse_config("offspring_size=10\n"), ConfigError);
    EXPECT_THROW(parse_config("max_depth=18\n"), ConfigError);
}

TEST(Tournament, BestOfFourWithReplacement) {
    std::vector<Individual> pop;
    for (int i = 0; i < 4; ++i) pop.push_back({ExprTree(), static_cast<double>(i)});
    Rng rng(61);
    const int draws = 100000;
    int best = 0;
    for (int i = 0; i < draws; ++i) best += tournament(pop, 4, rng) == 0;
    // 1 - (3/4)^4
    const double p = 1.0 - std::pow(0.75, 4);
    EXPECT_NEAR(p, 0.684, 5e-4);
    EXPECT_NEAR(static_cast<double>(best) / draws, p, 4.0 * std::sqrt(p * (1 - p) / draws));
}

TEST(Tournament, TiesGoToEarliestDraw) {
    std::vector<Individual> pop(5, Individual{ExprTree(), 1.0});
    Rng a(7), b(7);
    const std::size_t first = b.index(5);
    EXPECT_EQ(tournament(pop, 4, a), first);
}

TEST(Evolution, InitialPopulationIsRampedHalfAndHalf) {
    const GPConfig cfg = small_config();
    Rng rng(67);
    Rng data_rng(1);
    const RecordColumns cols(linear_target(20, data_rng));
    const auto pop = initial_population(cfg, cols, rng);
    ASSERT_EQ(pop.size(), cfg.population_size);
    for (const auto& ind : pop) {
        EXPECT_GE(ind.tree.depth(), 1);
        EXPECT_LE(ind.tree.depth(), cfg.init_depth_max);
    }
    EXPECT_EQ(pop[0].tree.depth(), cfg.init_depth_min);
}

TEST(Evolution, NextGenerationIsSortedAndSized) {
    const GPConfig cfg = small_config();
    Rng rng(71);
    Rng data_rng(2);
    const auto records = linear_target(40, data_rng);
    const RecordColumns cols(records);
    const auto pop = initial_population(cfg, cols, rng);
    const auto next = next_generation(pop, cfg, cols, rng);
    ASSERT_EQ(next.size(), cfg.population_size);
    for (std::size_t i = 1; i < next.size(); ++i) EXPECT_LE(next[i - 1].fitness, next[i].fitness);
    for (const auto& ind : next) {
        EXPECT_EQ(ind.fitness, fitness(ind.tree, records));
        EXPECT_LE(ind.tree.depth(), cfg.max_depth);
    }
}

TEST(Evolution, StaticRunIsDeterministicAndImproves) {
    const GPConfig cfg = small_config();
    Rng data_rng(3);
    std::vector<RecordSet> samples{{"S1", linear_target(50, data_rng)}, {"S2", linear_target(50, data_rng)}};
    const auto eval_set = linear_target(100, data_rng);
    ScheduleOptions sched;
    sched.policy = Policy::Static;
    sched.static_sample = 1;
    sched.k = 2;
    const RunResult a = run(cfg, sched, samples, eval_set);
    const RunResult b = run(cfg, sched, samples, eval_set);
    EXPECT_EQ(a.best.tree, b.best.tree);
    EXPECT_EQ(a.log.size(), cfg.max_generations_static);
    EXPECT_LE(a.log.back().best_mse, a.log.front().best_mse);
    for (const auto& e : a.log) EXPECT_EQ(e.sample, 1u);
    EXPECT_EQ(a.total.mse, fitness(a.best.tree, eval_set));
    EXPECT_EQ(a.best.fitness, fitness(a.best.tree, samples[1].items));
}

TEST(Evolution, SerialAndParallelRunsAgree) {
    GPConfig cfg = small_config();
    Rng data_rng(4);
    std::vector<RecordSet> samples{{"S1", linear_target(60, data_rng)}};
    ScheduleOptions sched;
    sched.k = 1;
    cfg.execution = Execution::Serial;
    const RunResult s = run(cfg, sched, samples, samples[0].items);
    cfg.execution = Execution::Parallel;
    const RunResult p = run(cfg, sched, samples, samples[0].items);
    EXPECT_EQ(s.best.tree, p.best.tree);
    EXPECT_EQ(s.total.mse, p.total.mse);
}

TEST(Evolution, DynamicRunActivatesEveryWindow) {
    const GPConfig cfg = small_config();
    Rng data_rng(5);
    std::vector<RecordSet> samples;
    for (int i = 0; i < 3; ++i) samples.push_back({"S" + std::to_string(i + 1), linear_target(30, data_rng)});
    ScheduleOptions sched;
    sched.policy = Policy::Sss;
    sched.k = 3;
    sched.generations_per_sample = cfg.generations_per_sample;
    const RunResult r = run(cfg, sched, samples, samples[0].items);
    // 23 generations, g = 5: four windows, the last one eight generations long.
    ASSERT_EQ(r.activations.size(), 4u);
    EXPECT_EQ(r.activations[0].sample, 0u);
    EXPECT_EQ(r.activations[1].sample, 1u);
    EXPECT_EQ(r.activations[2].sample, 2u);
    EXPECT_EQ(r.activations[3].sample, 0u);
    EXPECT_EQ(r.activations[3].generation, 16u);
    EXPECT_EQ(r.log.size(), 23u);
    EXPECT_EQ(r.final_sample, 0u);
    std::size_t activated = 0;
    for (const auto& e : r.log) activated += e.activated;
    EXPECT_EQ(activated, 4u);
}

TEST(Evolution, AdaptiveWeightsComeFromTheWindow) {
    GPConfig cfg = small_config();
    Rng data_rng(6);
    std::vector<RecordSet> samples;
    for (int i = 0; i < 3; ++i) samples.push_back({"C" + std::to_string(i + 1) + "L", linear_target(30, data_rng)});
    ScheduleOptions sched;
    sched.policy = Policy::Asss;
    sched.k = 3;
    sched.generations_per_sample = cfg.generations_per_sample;
    const RunResult r = run(cfg, sched, samples, samples[0].items);
    for (const auto& a : r.activations) {
        EXPECT_GE(a.weight_after, 0.0);
        EXPECT_TRUE(std::isfinite(a.weight_after));
    }
}

TEST(Evolution, RunRejectsMismatchedSchedule) {
    const GPConfig cfg = small_config();
    Rng data_rng(7);
    std::vector<RecordSet> samples{{"S1", linear_target(10, data_rng)}};
    ScheduleOptions sched;
    sched.k = 2;
    EXPECT_THROW(run(cfg, sched, samples, samples[0].items), ConfigError);
    samples.push_back({"S2", {}});
    EXPECT_THROW(run(cfg, sched, samples, samples[0].items), ConfigError);
}

TEST(Evolution, RunLogFormat) {
    const GPConfig cfg = small_config();
    Rng data_rng(8);
    std::vector<RecordSet> samples{{"S1", linear_target(10, data_rng)}};
    ScheduleOptions sched;
    sched.k = 1;
    const RunResult r = run(cfg, sched, samples, samples[0].items);
    const std::string log = format_run_log(r, samples, Policy::Static);
    EXPECT_EQ(log.substr(0, log.find('\n')), "generation,sample_id,best_mse,mean_mse,policy,activated,weight");
    EXPECT_NE(log.find("\n1,S1,"), std::string::npos);
}

TEST(Evolution, MseTotalStddev) {
    const std::vector<Record> recs{{0, 0, 0, 1.0}, {0, 0, 0, 3.0}};
    const MseTotal m = mse_total(make_constant(0.0), recs);
    EXPECT_DOUBLE_EQ(m.mse, 5.0);
    EXPECT_DOUBLE_EQ(m.stddev, 4.0);
}
