#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gpvol/rng.hpp"

namespace gpvol {

/// Primitive set of the volatility trees: three input terminals, a literal
/// constant (only produced by parsing external formulas) and ten operators.
enum class Op : std::uint8_t {
    PriceOverStrike,  // C/K for call models, P/K for put models
    Moneyness,        // S/K
    Tau,              // years to expiry
    Constant,
    Add,
    Sub,
    Mul,
    Div,  // protected: x % 0 = 1
    Ln,   // protected: ln|x|, 0 near zero
    Exp,  // argument clamped at 80
    Sqrt, // protected: sqrt|x|
    Cos,
    Sin,
    Ncdf,
};

int arity(Op op);
bool is_terminal(Op op);

struct Node {
    Op op = Op::Moneyness;
    double value = 0.0;  // used by Op::Constant only

    friend bool operator==(const Node&, const Node&) = default;
};

/// The three model inputs of one observation.
struct TreeInputs {
    double price_over_strike = 0.0;
    double moneyness = 0.0;
    double tau = 0.0;
};

/// Which market price the first terminal stands for.
enum class TerminalBinding { Call, Put };

inline constexpr int kMaxTreeDepth = 17;
inline constexpr int kMaxInitDepth = 6;
inline constexpr int kOperatorRetries = 10;

/// Immutable expression tree stored as a prefix-ordered node array.
///
/// The subtree rooted at index i occupies [i, subtree_end(i)).
class ExprTree {
public:
    /// Single-terminal tree.
    ExprTree();

    /// Validates arity and finiteness of constants. Throws ParseError.
    explicit ExprTree(std::vector<Node> prefix);

    std::span<const Node> nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    int depth() const { return depth_; }

    std::size_t subtree_end(std::size_t index) const;

    /// Depth of the node at `index` measured from the root (root = 1).
    std::vector<int> node_levels() const;

    friend bool operator==(const ExprTree& a, const ExprTree& b) { return a.nodes_ == b.nodes_; }

private:
    std::vector<Node> nodes_;
    int depth_ = 1;
};

ExprTree make_terminal(Op op);
ExprTree make_constant(double value);
ExprTree make_unary(Op op, const ExprTree& child);
ExprTree make_binary(Op op, const ExprTree& lhs, const ExprTree& rhs);

/// Total evaluation: the result is finite for every tree and finite input.
double eval(const ExprTree& tree, const TreeInputs& in);

inline int depth(const ExprTree& t) { return t.depth(); }
inline std::size_t size(const ExprTree& t) { return t.size(); }

enum class InitMethod { Grow, Full };

/// Koza grow/full generation over the variable terminals (no constants).
/// max_depth counts nodes on a root-leaf path; 1 yields a single terminal.
ExprTree random_tree(int max_depth, InitMethod method, Rng& rng);

/// Swap the subtrees rooted at a[i] and b[j].
std::pair<ExprTree, ExprTree> crossover_at(const ExprTree& a, std::size_t i, const ExprTree& b,
                                           std::size_t j);

/// Uniform-point subtree crossover. Children deeper than kMaxTreeDepth cause
/// a retry; after kOperatorRetries failures the parents come back unchanged.
std::pair<ExprTree, ExprTree> crossover(const ExprTree& a, const ExprTree& b, Rng& rng,
                                        int max_depth = kMaxTreeDepth);

enum class MutationKind { Point, Branch, Expansion };

/// Point: one node swapped for another primitive of the same arity.
/// Branch: an internal node's subtree replaced by a grow tree of depth <= 6.
/// Expansion: a terminal replaced by a grow tree of depth <= 6.
/// Depth violations are retried, then the input is returned unchanged.
ExprTree mutate(const ExprTree& tree, MutationKind kind, Rng& rng, int max_depth = kMaxTreeDepth);

/// Canonical prefix text, e.g. "(sqrt (% cok (+ sok tau)))".
std::string format(const ExprTree& tree, TerminalBinding binding = TerminalBinding::Call);

/// Inverse of format. Accepts both "cok" and "pok" for the price terminal.
/// Throws ParseError on malformed text.
ExprTree parse(std::string_view text);

/// Reference call model: sqrt( (C/K) / ((S/K)^6 + (S/K)^5 * tau) ).
ExprTree builtin_call_model();

/// Reference put model:
/// ncdf( sin(cos(sin(-cos(sin tau) - 2 ln(P/K)))) - exp(S/K) ).
ExprTree builtin_put_model();

}  // namespace gpvol
