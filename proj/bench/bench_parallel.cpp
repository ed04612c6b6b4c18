// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "gpvol/blackscholes.hpp"
#include "gpvol/hedging.hpp"
#include "gpvol/kernels.hpp"
#include "gpvol/synthmarket.hpp"

using namespace gpvol;

namespace {

RecordColumns make_records(std::size_t n) {
    Rng rng(1);
    std::vector<Record> rs;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = rng.uniform(0.9, 1.15), tau = rng.uniform(0.03, 1.0), k = 1000 / m;
        const double sigma = 0.2 + 0.1 * (m - 1) * (m - 1);
        rs.push_back({bs::price({1000, k, 0.02, tau, sigma, OptionKind::Call}) / k, m, tau, sigma});
    }
    return RecordColumns(rs);
}

std::vector<ExprTree> make_population(std::size_t n) {
    Rng rng(2);
    std::vector<ExprTree> trees;
    for (std::size_t i = 0; i < n; ++i) {
        trees.push_back(random_tree(2 + static_cast<int>(i % 5), i % 2 ? InitMethod::Grow : InitMethod::Full, rng));
    }
    return trees;
}

void BM_PopulationFitness(benchmark::State& state, Execution exec) {
    const RecordColumns cols = make_records(static_cast<std::size_t>(state.range(0)));
    const auto trees = make_population(200);
    for (auto _ : state) benchmark::DoNotOptimize(population_fitness(trees, cols, exec));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trees.size()) * state.range(0));
}

void BM_HedgeReport(benchmark::State& state, Execution exec) {
    Rng rng(3);
    std::vector<HedgePath> paths;
    for (int i = 0; i < state.range(0); ++i) {
        HedgeScenario sc;
        sc.strike = 90 + (i % 5) * 5;
        sc.companion_strike = sc.strike + 5;
        sc.expiry_days = 45 + (i % 3) * 120;
        sc.horizon_days = 30;
        paths.push_back(make_hedge_path(sc, rng));
    }
    const std::optional<VolSource> gp = VolSource::gp_model(builtin_call_model());
    for (auto _ : state) benchmark::DoNotOptimize(build_report(paths, gp, {}, exec));
}

}  // namespace

BENCHMARK_CAPTURE(BM_PopulationFitness, serial, Execution::Serial)->Arg(500)->Arg(5000);
BENCHMARK_CAPTURE(BM_PopulationFitness, parallel, Execution::Parallel)->Arg(500)->Arg(5000);
BENCHMARK_CAPTURE(BM_HedgeReport, serial, Execution::Serial)->Arg(60);
BENCHMARK_CAPTURE(BM_HedgeReport, parallel, Execution::Parallel)->Arg(60);

BENCHMARK_MAIN();
