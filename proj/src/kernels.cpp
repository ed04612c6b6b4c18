#include "gpvol/kernels.hpp"

#include <limits>

#include "gpvol/protected_ops.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gpvol {

RecordColumns::RecordColumns(std::span<const Record> records) {
    price_over_strike.reserve(records.size());
    moneyness.reserve(records.size());
    tau.reserve(records.size());
    target.reserve(records.size());
    for (const Record& r : records) {
        price_over_strike.push_back(r.price_over_strike);
        moneyness.push_back(r.moneyness);
        tau.push_back(r.tau);
        target.push_back(r.target);
    }
}

namespace {

struct Slot {
    const double* data;
    int buffer;  // -1 for borrowed input columns
};

int acquire(EvalWorkspace& ws, std::size_t n) {
    int id;
    if (!ws.free_ids.empty()) {
        id = ws.free_ids.back();
        ws.free_ids.pop_back();
    } else {
        id = static_cast<int>(ws.buffers.size());
        ws.buffers.emplace_back();
    }
    ws.buffers[static_cast<std::size_t>(id)].resize(n);
    return id;
}

void release(EvalWorkspace& ws, const Slot& s) {
    if (s.buffer >= 0) ws.free_ids.push_back(s.buffer);
}

template <typename F>
void unary_loop(const double* x, double* out, std::size_t n, F f) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(x[i]);
}

template <typename F>
void binary_loop(const double* x, const double* y, double* out, std::size_t n, F f) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(x[i], y[i]);
}

void apply_unary(Op op, const double* x, double* out, std::size_t n) {
    namespace p = protected_ops;
    switch (op) {
        case Op::Ln: unary_loop(x, out, n, [](double v) { return p::ln(v); }); break;
        case Op::Exp: unary_loop(x, out, n, [](double v) { return p::exp(v); }); break;
        case Op::Sqrt: unary_loop(x, out, n, [](double v) { return p::sqrt(v); }); break;
        case Op::Cos: unary_loop(x, out, n, [](double v) { return std::cos(v); }); break;
        case Op::Sin: unary_loop(x, out, n, [](double v) { return std::sin(v); }); break;
        case Op::Ncdf: unary_loop(x, out, n, [](double v) { return p::ncdf(v); }); break;
        default: break;
    }
}

void apply_binary(Op op, const double* x, const double* y, double* out, std::size_t n) {
    namespace p = protected_ops;
    switch (op) {
        case Op::Add: binary_loop(x, y, out, n, [](double a, double b) { return p::saturate(a + b); }); break;
        case Op::Sub: binary_loop(x, y, out, n, [](double a, double b) { return p::saturate(a - b); }); break;
        case Op::Mul: binary_loop(x, y, out, n, [](double a, double b) { return p::saturate(a * b); }); break;
        case Op::Div: binary_loop(x, y, out, n, [](double a, double b) { return p::div(a, b); }); break;
        default: break;
    }
}

}  // namespace

void eval_batch(const ExprTree& tree, const RecordColumns& cols, std::span<double> out, EvalWorkspace& ws) {
    const std::size_t n = cols.size();
    const auto nodes = tree.nodes();
    std::vector<Slot> stack;
    stack.reserve(static_cast<std::size_t>(tree.depth()) + 2);
    std::vector<int> constant_buffers;

    // Reverse prefix order is a valid postfix walk: operands are on the stack
    // (first operand on top) when their operator is reached.
    for (std::size_t k = nodes.size(); k-- > 0;) {
        const Node& node = nodes[k];
        switch (node.op) {
            case Op::PriceOverStrike: stack.push_back({cols.price_over_strike.data(), -1}); continue;
            case Op::Moneyness: stack.push_back({cols.moneyness.data(), -1}); continue;
            case Op::Tau: stack.push_back({cols.tau.data(), -1}); continue;
            case Op::Constant: {
                const int id = acquire(ws, n);
                std::fill(ws.buffers[static_cast<std::size_t>(id)].begin(),
                          ws.buffers[static_cast<std::size_t>(id)].end(), node.value);
                stack.push_back({ws.buffers[static_cast<std::size_t>(id)].data(), id});
                continue;
            }
            default: break;
        }
        if (arity(node.op) == 1) {
            const Slot arg = stack.back();
            stack.pop_back();
            const int id = arg.buffer >= 0 ? arg.buffer : acquire(ws, n);
            double* dst = ws.buffers[static_cast<std::size_t>(id)].data();
            apply_unary(node.op, arg.data, dst, n);
            stack.push_back({dst, id});
        } else {
            const Slot lhs = stack.back();
            stack.pop_back();
            const Slot rhs = stack.back();
            stack.pop_back();
            int id;
            if (lhs.buffer >= 0) {
                id = lhs.buffer;
                release(ws, rhs);
            } else if (rhs.buffer >= 0) {
                id = rhs.buffer;
            } else {
                id = acquire(ws, n);
            }
            double* dst = ws.buffers[static_cast<std::size_t>(id)].data();
            apply_binary(node.op, lhs.data, rhs.data, dst, n);
            stack.push_back({dst, id});
        }
    }
    const Slot result = stack.back();
    std::copy(result.data, result.data + n, out.begin());
    release(ws, result);
}

std::vector<double> eval_batch(const ExprTree& tree, const RecordColumns& cols) {
    EvalWorkspace ws;
    std::vector<double> out(cols.size());
    eval_batch(tree, cols, out, ws);
    return out;
}

namespace {

double mse_from_predictions(std::span<const double> predicted, const std::vector<double>& target) {
    double sum = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double e = target[i] - predicted[i];
        sum += e * e;
    }
    const double mse = sum / static_cast<double>(target.size());
    return mse <= std::numeric_limits<double>::max() ? mse : std::numeric_limits<double>::max();
}

thread_local std::vector<double> tl_predictions;

}  // namespace

double mse_batch(const ExprTree& tree, const RecordColumns& cols, EvalWorkspace& ws) {
    tl_predictions.resize(cols.size());
    eval_batch(tree, cols, tl_predictions, ws);
    return mse_from_predictions(tl_predictions, cols.target);
}

std::vector<double> squared_errors(const ExprTree& tree, const RecordColumns& cols) {
    std::vector<double> out = eval_batch(tree, cols);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double e = cols.target[i] - out[i];
        out[i] = e * e;
    }
    return out;
}

std::vector<double> population_fitness_serial(std::span<const ExprTree> trees, const RecordColumns& cols) {
    std::vector<double> fitness(trees.size());
    EvalWorkspace ws;
    for (std::size_t i = 0; i < trees.size(); ++i) fitness[i] = mse_batch(trees[i], cols, ws);
    return fitness;
}

std::vector<double> population_fitness_parallel(std::span<const ExprTree> trees, const RecordColumns& cols) {
    std::vector<double> fitness(trees.size());
    const auto count = static_cast<long>(trees.size());
#pragma omp parallel
    {
        EvalWorkspace ws;
#pragma omp for schedule(dynamic, 4)
        for (long i = 0; i < count; ++i) {
            fitness[static_cast<std::size_t>(i)] = mse_batch(trees[static_cast<std::size_t>(i)], cols, ws);
        }
    }
    return fitness;
}

std::vector<double> population_fitness(std::span<const ExprTree> trees, const RecordColumns& cols,
                                       Execution exec) {
    return exec == Execution::Parallel ? population_fitness_parallel(trees, cols)
                                       : population_fitness_serial(trees, cols);
}

}  // namespace gpvol
