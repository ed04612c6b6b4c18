#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpvol/gptree.hpp"
#include "gpvol/kernels.hpp"
#include "gpvol/quotes.hpp"
#include "gpvol/subsetsel.hpp"

namespace gpvol {

/// GP run parameters. Defaults are the standard settings.
struct GPConfig {
    std::size_t population_size = 100;
    std::size_t offspring_size = 200;
    std::size_t max_generations_static = 400;
    std::size_t max_generations_dynamic = 1000;
    std::size_t generations_per_sample = 20;
    int init_depth_min = 2;
    int init_depth_max = 6;
    int max_depth = kMaxTreeDepth;
    std::size_t tournament_size = 4;
    double p_crossover = 0.60;
    double p_branch = 0.20;
    double p_point = 0.10;
    double p_expansion = 0.10;
    std::uint64_t seed = 1;
    WeightSource weight_source = WeightSource::Best;
    bool reorder_each_activation = false;
    double asss_constant = 1.0;
    Execution execution = Execution::Parallel;

    double p_mutation() const { return p_branch + p_point + p_expansion; }
    std::size_t max_generations(Policy policy) const {
        return is_dynamic(policy) ? max_generations_dynamic : max_generations_static;
    }

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

/// Flat key=value form; keys are the field names above. Unknown keys and
/// malformed values throw ConfigError.
GPConfig parse_config(std::string_view text);
std::string write_config(const GPConfig& cfg);

struct Individual {
    ExprTree tree;
    double fitness = 0.0;  // MSE on the active training sample
};

/// Reference MSE: (1/N) sum (target - eval(t, inputs))^2, per-record scalar
/// evaluation. Precondition: data is non-empty.
double fitness(const ExprTree& tree, std::span<const Record> data);

struct MseTotal {
    double mse = 0.0;
    double stddev = 0.0;  // population standard deviation of squared errors
};

MseTotal mse_total(const ExprTree& tree, std::span<const Record> enlarged);

/// Draws `size` members uniformly with replacement and returns the index of
/// the fittest; ties go to the earliest draw.
std::size_t tournament(std::span<const Individual> pop, std::size_t size, Rng& rng);

/// Ramped half-and-half over [init_depth_min, init_depth_max], evaluated on `data`.
std::vector<Individual> initial_population(const GPConfig& cfg, const RecordColumns& data, Rng& rng);

/// One comma-replacement step: offspring_size children from crossover or
/// mutation, evaluated on `data`, best population_size kept in fitness order.
std::vector<Individual> next_generation(std::span<const Individual> pop, const GPConfig& cfg,
                                        const RecordColumns& data, Rng& rng);

struct GenerationLog {
    std::size_t generation = 0;
    std::size_t sample = 0;
    double best_mse = 0.0;
    double mean_mse = 0.0;
    bool activated = false;  // a new window started at this generation
    double weight = 0.0;     // current schedule weight of the active sample
};

struct ActivationTrace {
    std::size_t generation = 0;  // first generation of the window
    std::size_t sample = 0;
    double weight_after = 0.0;   // weight recorded when the window closed
};

struct RunResult {
    Individual best;
    std::size_t final_sample = 0;
    std::vector<GenerationLog> log;
    std::vector<ActivationTrace> activations;
    MseTotal total;
};

/// Full GP run. Static schedules train on one sample for
/// max_generations_static; dynamic schedules switch samples every
/// generations_per_sample generations for floor(max_generations_dynamic / g)
/// windows (any leftover generations extend the last window). The population
/// is re-evaluated whenever a new sample becomes active. The returned best
/// is the fittest individual seen during the final window; `total` is its
/// MSE over `eval_set`.
///
/// Throws ConfigError when the schedule and samples disagree or a sample is empty.
RunResult run(const GPConfig& cfg, const ScheduleOptions& schedule, std::span<const RecordSet> samples,
              std::span<const Record> eval_set);

/// Run log as CSV: generation,sample_id,best_mse,mean_mse,policy,activated,weight.
std::string format_run_log(const RunResult& result, std::span<const RecordSet> samples, Policy policy);

}  // namespace gpvol
