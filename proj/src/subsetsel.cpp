#include "gpvol/subsetsel.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "gpvol/errors.hpp"

namespace gpvol {

std::string_view to_string(Policy p) {
    switch (p) {
        case Policy::Static: return "static";
        case Policy::Rss: return "rss";
        case Policy::Sss: return "sss";
        case Policy::Asss: return "asss";
        case Policy::Arss: return "arss";
    }
    return "?";
}

Policy policy_from_string(std::string_view text) {
    for (Policy p : {Policy::Static, Policy::Rss, Policy::Sss, Policy::Asss, Policy::Arss}) {
        if (text == to_string(p)) return p;
    }
    throw ConfigError("unknown subset policy '" + std::string(text) + "' (expected static|rss|sss|asss|arss)");
}

std::string_view to_string(WeightSource s) { return s == WeightSource::Best ? "best" : "population_mean"; }

WeightSource weight_source_from_string(std::string_view text) {
    if (text == "best") return WeightSource::Best;
    if (text == "population_mean") return WeightSource::PopulationMean;
    throw ConfigError("unknown weight_source '" + std::string(text) + "' (expected best|population_mean)");
}

std::size_t next_rss(std::size_t k, Rng& rng) { return rng.index(k); }

std::size_t next_sss(std::size_t current, std::size_t k) { return current + 1 < k ? current + 1 : 0; }

double update_weight(const SampleStats& stats) {
    if (stats.records == 0 || stats.errors.empty()) return 0.0;
    double total = 0.0;
    for (const auto& generation : stats.errors) {
        for (double e : generation) total += e;
    }
    return total / (static_cast<double>(stats.records) * static_cast<double>(stats.errors.size()));
}

std::vector<std::size_t> reorder(const std::vector<double>& weights) {
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
    return order;
}

SubsetSchedule::SubsetSchedule(const ScheduleOptions& options, Rng& rng) : opt_(options) {
    if (opt_.k == 0) throw ConfigError("subset schedule needs at least one sample");
    if (opt_.generations_per_sample == 0) throw ConfigError("generations_per_sample must be positive");
    if (opt_.policy == Policy::Static && opt_.static_sample >= opt_.k) {
        throw ConfigError("static sample index out of range");
    }
    switch (opt_.policy) {
        case Policy::Asss:
            weights_.assign(opt_.k, opt_.asss_constant);
            break;
        case Policy::Arss:
            if (opt_.initial_weights) {
                if (opt_.initial_weights->size() != opt_.k) throw ConfigError("initial_weights must have k entries");
                weights_ = *opt_.initial_weights;
            } else {
                weights_.resize(opt_.k);
                for (double& w : weights_) w = rng.uniform();
            }
            break;
        default:
            break;
    }
    if (!weights_.empty()) order_ = reorder(weights_);
}

std::size_t SubsetSchedule::next(Rng& rng) {
    std::size_t chosen = 0;
    switch (opt_.policy) {
        case Policy::Static:
            chosen = opt_.static_sample;
            break;
        case Policy::Rss:
            chosen = next_rss(opt_.k, rng);
            break;
        case Policy::Sss:
            chosen = current_ ? next_sss(*current_, opt_.k) : 0;
            break;
        case Policy::Asss:
        case Policy::Arss:
            if (pass_pos_ >= order_.size()) {
                order_ = reorder(weights_);
                pass_pos_ = 0;
            }
            chosen = order_[pass_pos_++];
            break;
    }
    current_ = chosen;
    return chosen;
}

void SubsetSchedule::record_weight(std::size_t sample, double weight) {
    if (weights_.empty()) return;
    weights_.at(sample) = weight;
    if (opt_.reorder_each_activation) {
        // Restart the walk from the hardest sample other than the one just trained on.
        order_ = reorder(weights_);
        if (order_.size() > 1 && order_.front() == sample) {
            std::rotate(order_.begin(), order_.begin() + 1, order_.end());
        }
        pass_pos_ = 0;
    }
}

}  // namespace gpvol
