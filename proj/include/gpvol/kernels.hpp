#pragma once

#include <span>
#include <vector>

#include "gpvol/gptree.hpp"
#include "gpvol/quotes.hpp"

namespace gpvol {

/// Records laid out column-wise for the batch interpreter.
struct RecordColumns {
    std::vector<double> price_over_strike;
    std::vector<double> moneyness;
    std::vector<double> tau;
    std::vector<double> target;

    RecordColumns() = default;
    explicit RecordColumns(std::span<const Record> records);

    std::size_t size() const { return target.size(); }
};

/// Scratch buffers reused across batch evaluations. One per thread.
struct EvalWorkspace {
    std::vector<std::vector<double>> buffers;
    std::vector<int> free_ids;
};

/// Evaluates `tree` at every record, one operator at a time over whole
/// columns. Bit-identical to calling eval() per record.
void eval_batch(const ExprTree& tree, const RecordColumns& cols, std::span<double> out, EvalWorkspace& ws);
std::vector<double> eval_batch(const ExprTree& tree, const RecordColumns& cols);

/// Mean squared error against cols.target, accumulated in record order.
/// An overflowing sum saturates at the largest finite double.
double mse_batch(const ExprTree& tree, const RecordColumns& cols, EvalWorkspace& ws);

/// Per-record squared errors (target - tree)^2.
std::vector<double> squared_errors(const ExprTree& tree, const RecordColumns& cols);

enum class Execution { Serial, Parallel };

/// MSE of every tree on `cols`. The parallel kernel distributes trees over
/// OpenMP threads; each tree is still summed serially, so both kernels
/// return identical values.
std::vector<double> population_fitness_serial(std::span<const ExprTree> trees, const RecordColumns& cols);
std::vector<double> population_fitness_parallel(std::span<const ExprTree> trees, const RecordColumns& cols);
std::vector<double> population_fitness(std::span<const ExprTree> trees, const RecordColumns& cols,
                                       Execution exec);

}  // namespace gpvol
