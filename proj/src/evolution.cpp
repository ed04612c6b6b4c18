#include "gpvol/evolution.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gpvol/csv.hpp"
#include "gpvol/errors.hpp"

namespace gpvol {

void GPConfig::validate() const {
    if (population_size == 0) throw ConfigError("population_size must be positive");
    if (offspring_size < population_size) {
        throw ConfigError("offspring_size must be at least population_size for comma replacement");
    }
    if (max_generations_static == 0 || max_generations_dynamic == 0) {
        throw ConfigError("max_generations must be positive");
    }
    if (generations_per_sample == 0) throw ConfigError("generations_per_sample must be positive");
    if (init_depth_min < 1 || init_depth_max < init_depth_min || init_depth_max > max_depth) {
        throw ConfigError("init depth range must satisfy 1 <= min <= max <= max_depth");
    }
    if (max_depth < 1 || max_depth > kMaxTreeDepth) throw ConfigError("max_depth must be in [1, 17]");
    if (tournament_size == 0) throw ConfigError("tournament_size must be positive");
    for (double p : {p_crossover, p_branch, p_point, p_expansion}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("operator probabilities must lie in [0, 1]");
    }
    if (std::abs(p_crossover + p_mutation() - 1.0) > 1e-9) {
        throw ConfigError("operator probabilities must sum to 1");
    }
    if (!(asss_constant > 0.0)) throw ConfigError("asss_constant must be positive");
}

namespace {

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
    T value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ConfigError("config key '" + key + "': invalid value '" + text + "'");
    }
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("config key '" + key + "': expected true|false");
}

}  // namespace

GPConfig parse_config(std::string_view text) {
    kv::Map entries;
    try {
        entries = kv::parse(text);
    } catch (const ParseError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    GPConfig cfg;
    for (const auto& [key, value] : entries) {
        if (key == "population_size") cfg.population_size = parse_value<std::size_t>(key, value);
        else if (key == "offspring_size") cfg.offspring_size = parse_value<std::size_t>(key, value);
        else if (key == "max_generations_static") cfg.max_generations_static = parse_value<std::size_t>(key, value);
        else if (key == "max_generations_dynamic") cfg.max_generations_dynamic = parse_value<std::size_t>(key, value);
        else if (key == "generations_per_sample") cfg.generations_per_sample = parse_value<std::size_t>(key, value);
        else if (key == "init_depth_min") cfg.init_depth_min = parse_value<int>(key, value);
        else if (key == "init_depth_max") cfg.init_depth_max = parse_value<int>(key, value);
        else if (key == "max_depth") cfg.max_depth = parse_value<int>(key, value);
        else if (key == "tournament_size") cfg.tournament_size = parse_value<std::size_t>(key, value);
        else if (key == "p_crossover") cfg.p_crossover = parse_value<double>(key, value);
        else if (key == "p_branch") cfg.p_branch = parse_value<double>(key, value);
        else if (key == "p_point") cfg.p_point = parse_value<double>(key, value);
        else if (key == "p_expansion") cfg.p_expansion = parse_value<double>(key, value);
        else if (key == "seed") cfg.seed = parse_value<std::uint64_t>(key, value);
        else if (key == "weight_source") cfg.weight_source = weight_source_from_string(value);
        else if (key == "reorder_each_activation") cfg.reorder_each_activation = parse_bool(key, value);
        else if (key == "asss_constant") cfg.asss_constant = parse_value<double>(key, value);
        else if (key == "execution") {
            if (value == "serial") cfg.execution = Execution::Serial;
            else if (value == "parallel") cfg.execution = Execution::Parallel;
            else throw ConfigError("config key 'execution': expected serial|parallel");
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

std::string write_config(const GPConfig& cfg) {
    kv::Map m;
    m["population_size"] = std::to_string(cfg.population_size);
    m["offspring_size"] = std::to_string(cfg.offspring_size);
    m["max_generations_static"] = std::to_string(cfg.max_generations_static);
    m["max_generations_dynamic"] = std::to_string(cfg.max_generations_dynamic);
    m["generations_per_sample"] = std::to_string(cfg.generations_per_sample);
    m["init_depth_min"] = std::to_string(cfg.init_depth_min);
    m["init_depth_max"] = std::to_string(cfg.init_depth_max);
    m["max_depth"] = std::to_string(cfg.max_depth);
    m["tournament_size"] = std::to_string(cfg.tournament_size);
    m["p_crossover"] = csv::format_number(cfg.p_crossover);
    m["p_branch"] = csv::format_number(cfg.p_branch);
    m["p_point"] = csv::format_number(cfg.p_point);
    m["p_expansion"] = csv::format_number(cfg.p_expansion);
    m["seed"] = std::to_string(cfg.seed);
    m["weight_source"] = std::string(to_string(cfg.weight_source));
    m["reorder_each_activation"] = cfg.reorder_each_activation ? "true" : "false";
    m["asss_constant"] = csv::format_number(cfg.asss_constant);
    m["execution"] = cfg.execution == Execution::Parallel ? "parallel" : "serial";
    return kv::write(m);
}

double fitness(const ExprTree& tree, std::span<const Record> data) {
    double sum = 0.0;
    for (const Record& r : data) {
        const double e = r.target - eval(tree, {r.price_over_strike, r.moneyness, r.tau});
        sum += e * e;
    }
    const double mse = sum / static_cast<double>(data.size());
    return mse <= std::numeric_limits<double>::max() ? mse : std::numeric_limits<double>::max();
}

MseTotal mse_total(const ExprTree& tree, std::span<const Record> enlarged) {
    MseTotal out;
    out.mse = fitness(tree, enlarged);
    const double n = static_cast<double>(enlarged.size());
    double var = 0.0;
    for (const Record& r : enlarged) {
        const double e = r.target - eval(tree, {r.price_over_strike, r.moneyness, r.tau});
        const double d = e * e - out.mse;
        var += d * d;
    }
    out.stddev = std::sqrt(var / n);
    if (!std::isfinite(out.stddev)) out.stddev = std::numeric_limits<double>::max();
    return out;
}

std::size_t tournament(std::span<const Individual> pop, std::size_t size, Rng& rng) {
    std::size_t best = rng.index(pop.size());
    for (std::size_t draw = 1; draw < size; ++draw) {
        const std::size_t candidate = rng.index(pop.size());
        if (pop[candidate].fitness < pop[best].fitness) best = candidate;
    }
    return best;
}

namespace {

std::vector<Individual> evaluate(std::vector<ExprTree> trees, const RecordColumns& data, Execution exec) {
    const std::vector<double> fit = population_fitness(trees, data, exec);
    std::vector<Individual> out;
    out.reserve(trees.size());
    for (std::size_t i = 0; i < trees.size(); ++i) out.push_back({std::move(trees[i]), fit[i]});
    return out;
}

void reevaluate(std::vector<Individual>& pop, const RecordColumns& data, Execution exec) {
    std::vector<ExprTree> trees;
    trees.reserve(pop.size());
    for (const auto& ind : pop) trees.push_back(ind.tree);
    const std::vector<double> fit = population_fitness(trees, data, exec);
    for (std::size_t i = 0; i < pop.size(); ++i) pop[i].fitness = fit[i];
}

}  // namespace

std::vector<Individual> initial_population(const GPConfig& cfg, const RecordColumns& data, Rng& rng) {
    const int depth_count = cfg.init_depth_max - cfg.init_depth_min + 1;
    std::vector<ExprTree> trees;
    trees.reserve(cfg.population_size);
    for (std::size_t i = 0; i < cfg.population_size; ++i) {
        const int depth = cfg.init_depth_min + static_cast<int>(i % static_cast<std::size_t>(depth_count));
        const InitMethod method =
            (i / static_cast<std::size_t>(depth_count)) % 2 == 0 ? InitMethod::Full : InitMethod::Grow;
        trees.push_back(random_tree(depth, method, rng));
    }
    return evaluate(std::move(trees), data, cfg.execution);
}

std::vector<Individual> next_generation(std::span<const Individual> pop, const GPConfig& cfg,
                                        const RecordColumns& data, Rng& rng) {
    std::vector<ExprTree> children;
    children.reserve(cfg.offspring_size + 1);
    const double branch_cut = cfg.p_crossover + cfg.p_branch;
    const double point_cut = branch_cut + cfg.p_point;
    while (children.size() < cfg.offspring_size) {
        const double u = rng.uniform();
        if (u < cfg.p_crossover) {
            const auto& a = pop[tournament(pop, cfg.tournament_size, rng)].tree;
            const auto& b = pop[tournament(pop, cfg.tournament_size, rng)].tree;
            auto [c1, c2] = crossover(a, b, rng, cfg.max_depth);
            children.push_back(std::move(c1));
            if (children.size() < cfg.offspring_size) children.push_back(std::move(c2));
        } else {
            const MutationKind kind = u < branch_cut  ? MutationKind::Branch
                                      : u < point_cut ? MutationKind::Point
                                                      : MutationKind::Expansion;
            const auto& parent = pop[tournament(pop, cfg.tournament_size, rng)].tree;
            children.push_back(mutate(parent, kind, rng, cfg.max_depth));
        }
    }

    std::vector<Individual> offspring = evaluate(std::move(children), data, cfg.execution);
    std::vector<std::size_t> order(offspring.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return offspring[a].fitness < offspring[b].fitness;
    });
    std::vector<Individual> next;
    next.reserve(cfg.population_size);
    for (std::size_t i = 0; i < cfg.population_size; ++i) next.push_back(std::move(offspring[order[i]]));
    return next;
}

namespace {

std::vector<double> population_mean_errors(std::span<const Individual> pop, const RecordColumns& data) {
    std::vector<double> mean(data.size(), 0.0);
    for (const auto& ind : pop) {
        const std::vector<double> e = squared_errors(ind.tree, data);
        for (std::size_t j = 0; j < e.size(); ++j) mean[j] += e[j];
    }
    for (double& m : mean) m /= static_cast<double>(pop.size());
    return mean;
}

double mean_fitness(std::span<const Individual> pop) {
    double sum = 0.0;
    for (const auto& ind : pop) sum += ind.fitness;
    const double mean = sum / static_cast<double>(pop.size());
    return std::isfinite(mean) ? mean : std::numeric_limits<double>::max();
}

}  // namespace

RunResult run(const GPConfig& cfg, const ScheduleOptions& schedule_options, std::span<const RecordSet> samples,
              std::span<const Record> eval_set) {
    cfg.validate();
    if (samples.size() != schedule_options.k) {
        throw ConfigError("schedule expects " + std::to_string(schedule_options.k) + " samples, got " +
                          std::to_string(samples.size()));
    }
    for (const auto& s : samples) {
        if (s.items.empty()) throw ConfigError("training sample '" + s.name + "' is empty");
    }
    if (eval_set.empty()) throw ConfigError("evaluation set is empty");

    const Policy policy = schedule_options.policy;
    const std::size_t generations = cfg.max_generations(policy);
    const std::size_t window = is_dynamic(policy) ? schedule_options.generations_per_sample : generations;
    if (window > generations) {
        throw ConfigError("generations_per_sample exceeds the generation budget");
    }
    const std::size_t windows = generations / window;

    std::vector<RecordColumns> columns;
    columns.reserve(samples.size());
    for (const auto& s : samples) columns.emplace_back(s.items);

    Rng rng(cfg.seed);
    SubsetSchedule schedule(schedule_options, rng);

    RunResult result;
    std::size_t active = schedule.next(rng);
    result.activations.push_back({1, active, 0.0});
    std::vector<Individual> pop = initial_population(cfg, columns[active], rng);

    SampleStats stats{samples[active].items.size(), {}};
    Individual window_best{pop.front().tree, std::numeric_limits<double>::infinity()};
    std::size_t window_index = 0;
    bool just_activated = true;

    for (std::size_t gen = 1; gen <= generations; ++gen) {
        if (gen > 1 && (gen - 1) % window == 0 && window_index + 1 < windows) {
            const double w = update_weight(stats);
            schedule.record_weight(active, w);
            result.activations.back().weight_after = w;

            active = schedule.next(rng);
            ++window_index;
            result.activations.push_back({gen, active, 0.0});
            reevaluate(pop, columns[active], cfg.execution);
            stats = SampleStats{samples[active].items.size(), {}};
            window_best = Individual{pop.front().tree, std::numeric_limits<double>::infinity()};
            just_activated = true;
        }

        pop = next_generation(pop, cfg, columns[active], rng);

        const Individual& gen_best = pop.front();
        if (gen_best.fitness < window_best.fitness) window_best = gen_best;
        if (cfg.weight_source == WeightSource::Best) {
            stats.errors.push_back(squared_errors(gen_best.tree, columns[active]));
        } else {
            stats.errors.push_back(population_mean_errors(pop, columns[active]));
        }

        GenerationLog entry;
        entry.generation = gen;
        entry.sample = active;
        entry.best_mse = gen_best.fitness;
        entry.mean_mse = mean_fitness(pop);
        entry.activated = just_activated;
        entry.weight = schedule.weights().empty() ? 0.0 : schedule.weights()[active];
        result.log.push_back(entry);
        just_activated = false;
    }
    result.activations.back().weight_after = update_weight(stats);

    result.best = window_best;
    result.final_sample = active;
    result.total = mse_total(result.best.tree, eval_set);
    return result;
}

std::string format_run_log(const RunResult& result, std::span<const RecordSet> samples, Policy policy) {
    std::string out = "generation,sample_id,best_mse,mean_mse,policy,activated,weight\n";
    for (const auto& e : result.log) {
        out += std::to_string(e.generation);
        out += ',';
        out += samples[e.sample].name;
        out += ',';
        out += csv::format_number(e.best_mse);
        out += ',';
        out += csv::format_number(e.mean_mse);
        out += ',';
        out += to_string(policy);
        out += ',';
        out += e.activated ? '1' : '0';
        out += ',';
        out += csv::format_number(e.weight);
        out += '\n';
    }
    return out;
}

}  // namespace gpvol
