#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "gpvol/rng.hpp"

namespace gpvol {

enum class Policy { Static, Rss, Sss, Asss, Arss };

std::string_view to_string(Policy p);
Policy policy_from_string(std::string_view text);
inline bool is_dynamic(Policy p) { return p != Policy::Static; }

/// Which per-record error feeds the adaptive weights.
enum class WeightSource { Best, PopulationMean };
std::string_view to_string(WeightSource s);
WeightSource weight_source_from_string(std::string_view text);

// Sample indices are 0-based throughout; sample names carry the 1-based number.

/// Uniform draw with replacement from [0, k).
std::size_t next_rss(std::size_t k, Rng& rng);

/// Cyclic successor: current + 1, wrapping k-1 -> 0.
std::size_t next_sss(std::size_t current, std::size_t k);

/// Per-record squared errors recorded during one activation window:
/// errors[t][j] is the error on record j at the t-th generation of the window.
struct SampleStats {
    std::size_t records = 0;
    std::vector<std::vector<double>> errors;
};

/// Weight of a sample after its activation window: the sum over generations
/// and records of the recorded errors, divided by M * g.
double update_weight(const SampleStats& stats);

/// Sample indices sorted by weight, heaviest first; ties keep index order.
std::vector<std::size_t> reorder(const std::vector<double>& weights);

struct ScheduleOptions {
    Policy policy = Policy::Static;
    std::size_t static_sample = 0;
    std::size_t k = 1;
    std::size_t generations_per_sample = 20;
    double asss_constant = 1.0;
    /// Re-sort after every weight update instead of at pass boundaries.
    bool reorder_each_activation = false;
    /// Overrides the random ARSS initial weights (mainly for tests).
    std::optional<std::vector<double>> initial_weights;
};

/// Decides which training sample is active in each g-generation window.
///
/// Static always returns its fixed sample. RSS draws uniformly, SSS cycles.
/// ASSS and ARSS walk the samples in descending-weight order one pass at a
/// time; weights are refreshed via update_weight after each activation and
/// the order is recomputed when a pass completes.
class SubsetSchedule {
public:
    /// ARSS draws its initial weights from `rng` here unless overridden.
    SubsetSchedule(const ScheduleOptions& options, Rng& rng);

    Policy policy() const { return opt_.policy; }
    std::size_t k() const { return opt_.k; }
    std::size_t generations_per_sample() const { return opt_.generations_per_sample; }

    /// Index of the sample to activate for the next window.
    std::size_t next(Rng& rng);

    /// Records the weight of `sample` at the end of its activation window.
    void record_weight(std::size_t sample, double weight);

    const std::vector<double>& weights() const { return weights_; }
    /// Current pass order (adaptive policies only).
    const std::vector<std::size_t>& order() const { return order_; }
    std::optional<std::size_t> current() const { return current_; }

private:
    ScheduleOptions opt_;
    std::vector<double> weights_;
    std::vector<std::size_t> order_;
    std::size_t pass_pos_ = 0;
    std::optional<std::size_t> current_;
};

}  // namespace gpvol
