#include "gpvol/gptree.hpp"
#include "gpvol/protected_ops.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "gpvol/errors.hpp"

namespace gpvol {

int arity(Op op) {
    switch (op) {
        case Op::PriceOverStrike:
        case Op::Moneyness:
        case Op::Tau:
        case Op::Constant:
            return 0;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
            return 2;
        default:
            return 1;
    }
}

bool is_terminal(Op op) { return arity(op) == 0; }

namespace {

constexpr std::array<Op, 3> kVariables{Op::PriceOverStrike, Op::Moneyness, Op::Tau};
constexpr std::array<Op, 4> kBinary{Op::Add, Op::Sub, Op::Mul, Op::Div};
constexpr std::array<Op, 6> kUnary{Op::Ln, Op::Exp, Op::Sqrt, Op::Cos, Op::Sin, Op::Ncdf};
constexpr std::array<Op, 10> kFunctions{Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Ln,
                                        Op::Exp, Op::Sqrt, Op::Cos, Op::Sin, Op::Ncdf};

int compute_depth(std::span<const Node> nodes) {
    // Walk the prefix array keeping a stack of remaining child slots per level.
    std::vector<int> pending;
    int best = 0;
    for (const Node& n : nodes) {
        const int level = static_cast<int>(pending.size()) + 1;
        best = std::max(best, level);
        if (!pending.empty()) --pending.back();
        if (arity(n.op) > 0) {
            pending.push_back(arity(n.op));
        }
        while (!pending.empty() && pending.back() == 0) pending.pop_back();
    }
    return best;
}

std::vector<Node> splice(std::span<const Node> base, std::size_t begin, std::size_t end,
                         std::span<const Node> insert) {
    std::vector<Node> out;
    out.reserve(base.size() - (end - begin) + insert.size());
    out.insert(out.end(), base.begin(), base.begin() + static_cast<std::ptrdiff_t>(begin));
    out.insert(out.end(), insert.begin(), insert.end());
    out.insert(out.end(), base.begin() + static_cast<std::ptrdiff_t>(end), base.end());
    return out;
}

template <std::size_t N>
Op pick(const std::array<Op, N>& set, Rng& rng) {
    return set[rng.index(N)];
}

void grow_into(std::vector<Node>& out, int remaining, InitMethod method, Rng& rng) {
    if (remaining <= 1) {
        out.push_back({pick(kVariables, rng), 0.0});
        return;
    }
    Op op;
    if (method == InitMethod::Full) {
        op = pick(kFunctions, rng);
    } else {
        const std::size_t k = rng.index(kVariables.size() + kFunctions.size());
        op = k < kVariables.size() ? kVariables[k] : kFunctions[k - kVariables.size()];
    }
    out.push_back({op, 0.0});
    for (int c = 0; c < arity(op); ++c) grow_into(out, remaining - 1, method, rng);
}

}  // namespace

ExprTree::ExprTree() : nodes_{Node{Op::Moneyness, 0.0}}, depth_(1) {}

ExprTree::ExprTree(std::vector<Node> prefix) : nodes_(std::move(prefix)) {
    if (nodes_.empty()) throw ParseError("empty expression tree");
    long need = 1;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (need <= 0) throw ParseError("trailing nodes after a complete expression");
        const Node& n = nodes_[i];
        if (n.op == Op::Constant && !std::isfinite(n.value)) {
            throw ParseError("non-finite constant in expression tree");
        }
        need += arity(n.op) - 1;
    }
    if (need != 0) throw ParseError("incomplete expression tree (missing operands)");
    depth_ = compute_depth(nodes_);
}

std::size_t ExprTree::subtree_end(std::size_t index) const {
    long need = 1;
    std::size_t i = index;
    while (need > 0) {
        need += arity(nodes_[i].op) - 1;
        ++i;
    }
    return i;
}

std::vector<int> ExprTree::node_levels() const {
    std::vector<int> levels(nodes_.size());
    std::vector<int> pending;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        levels[i] = static_cast<int>(pending.size()) + 1;
        if (!pending.empty()) --pending.back();
        if (arity(nodes_[i].op) > 0) pending.push_back(arity(nodes_[i].op));
        while (!pending.empty() && pending.back() == 0) pending.pop_back();
    }
    return levels;
}

ExprTree make_terminal(Op op) {
    if (!is_terminal(op) || op == Op::Constant) throw ParseError("make_terminal: not a variable");
    return ExprTree({Node{op, 0.0}});
}

ExprTree make_constant(double value) { return ExprTree({Node{Op::Constant, value}}); }

ExprTree make_unary(Op op, const ExprTree& child) {
    if (arity(op) != 1) throw ParseError("make_unary: operator is not unary");
    std::vector<Node> nodes{Node{op, 0.0}};
    nodes.insert(nodes.end(), child.nodes().begin(), child.nodes().end());
    return ExprTree(std::move(nodes));
}

ExprTree make_binary(Op op, const ExprTree& lhs, const ExprTree& rhs) {
    if (arity(op) != 2) throw ParseError("make_binary: operator is not binary");
    std::vector<Node> nodes{Node{op, 0.0}};
    nodes.insert(nodes.end(), lhs.nodes().begin(), lhs.nodes().end());
    nodes.insert(nodes.end(), rhs.nodes().begin(), rhs.nodes().end());
    return ExprTree(std::move(nodes));
}

namespace {

double eval_at(std::span<const Node> nodes, std::size_t& i, const TreeInputs& in) {
    const Node& n = nodes[i++];
    switch (n.op) {
        case Op::PriceOverStrike: return in.price_over_strike;
        case Op::Moneyness: return in.moneyness;
        case Op::Tau: return in.tau;
        case Op::Constant: return n.value;
        default: break;
    }
    if (arity(n.op) == 1) {
        return protected_ops::apply_unary(n.op, eval_at(nodes, i, in));
    }
    const double lhs = eval_at(nodes, i, in);
    const double rhs = eval_at(nodes, i, in);
    return protected_ops::apply_binary(n.op, lhs, rhs);
}

}  // namespace

double eval(const ExprTree& tree, const TreeInputs& in) {
    std::size_t i = 0;
    return eval_at(tree.nodes(), i, in);
}

ExprTree random_tree(int max_depth, InitMethod method, Rng& rng) {
    std::vector<Node> nodes;
    grow_into(nodes, std::max(max_depth, 1), method, rng);
    return ExprTree(std::move(nodes));
}

std::pair<ExprTree, ExprTree> crossover_at(const ExprTree& a, std::size_t i, const ExprTree& b,
                                           std::size_t j) {
    const std::size_t a_end = a.subtree_end(i);
    const std::size_t b_end = b.subtree_end(j);
    const auto a_sub = a.nodes().subspan(i, a_end - i);
    const auto b_sub = b.nodes().subspan(j, b_end - j);
    return {ExprTree(splice(a.nodes(), i, a_end, b_sub)), ExprTree(splice(b.nodes(), j, b_end, a_sub))};
}

std::pair<ExprTree, ExprTree> crossover(const ExprTree& a, const ExprTree& b, Rng& rng, int max_depth) {
    for (int attempt = 0; attempt < kOperatorRetries; ++attempt) {
        const std::size_t i = rng.index(a.size());
        const std::size_t j = rng.index(b.size());
        auto children = crossover_at(a, i, b, j);
        if (children.first.depth() <= max_depth && children.second.depth() <= max_depth) {
            return children;
        }
    }
    return {a, b};
}

namespace {

Op other_with_same_arity(Op op, Rng& rng) {
    auto pick_other = [&](auto const& set) {
        // Draw from the set minus `op` (the whole set if op is not in it).
        std::vector<Op> choices;
        for (Op candidate : set) {
            if (candidate != op) choices.push_back(candidate);
        }
        return choices[rng.index(choices.size())];
    };
    switch (arity(op)) {
        case 0: return pick_other(kVariables);
        case 1: return pick_other(kUnary);
        default: return pick_other(kBinary);
    }
}

ExprTree point_mutation(const ExprTree& tree, Rng& rng) {
    std::vector<Node> nodes(tree.nodes().begin(), tree.nodes().end());
    const std::size_t i = rng.index(nodes.size());
    nodes[i] = Node{other_with_same_arity(nodes[i].op, rng), 0.0};
    return ExprTree(std::move(nodes));
}

}  // namespace

ExprTree mutate(const ExprTree& tree, MutationKind kind, Rng& rng, int max_depth) {
    if (kind == MutationKind::Point) return point_mutation(tree, rng);

    std::vector<std::size_t> sites;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const bool internal = arity(tree.nodes()[i].op) > 0;
        if ((kind == MutationKind::Branch) == internal) sites.push_back(i);
    }
    if (sites.empty()) return point_mutation(tree, rng);

    for (int attempt = 0; attempt < kOperatorRetries; ++attempt) {
        const std::size_t i = sites[rng.index(sites.size())];
        const ExprTree replacement = random_tree(kMaxInitDepth, InitMethod::Grow, rng);
        ExprTree child(splice(tree.nodes(), i, tree.subtree_end(i), replacement.nodes()));
        if (child.depth() <= max_depth) return child;
    }
    return tree;
}

namespace {

std::string_view op_token(Op op, TerminalBinding binding) {
    switch (op) {
        case Op::PriceOverStrike: return binding == TerminalBinding::Call ? "cok" : "pok";
        case Op::Moneyness: return "sok";
        case Op::Tau: return "tau";
        case Op::Add: return "+";
        case Op::Sub: return "-";
        case Op::Mul: return "*";
        case Op::Div: return "%";
        case Op::Ln: return "ln";
        case Op::Exp: return "exp";
        case Op::Sqrt: return "sqrt";
        case Op::Cos: return "cos";
        case Op::Sin: return "sin";
        case Op::Ncdf: return "ncdf";
        case Op::Constant: break;
    }
    return "?";
}

void format_into(std::string& out, std::span<const Node> nodes, std::size_t& i, TerminalBinding binding) {
    const Node& n = nodes[i++];
    if (n.op == Op::Constant) {
        std::array<char, 32> buf{};
        auto res = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
        out.append(buf.data(), res.ptr);
        return;
    }
    if (is_terminal(n.op)) {
        out += op_token(n.op, binding);
        return;
    }
    out += '(';
    out += op_token(n.op, binding);
    for (int c = 0; c < arity(n.op); ++c) {
        out += ' ';
        format_into(out, nodes, i, binding);
    }
    out += ')';
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    void parse_expr(std::vector<Node>& out) {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        if (text_[pos_] == '(') {
            ++pos_;
            const std::string_view tok = token();
            const Op op = function_op(tok);
            out.push_back({op, 0.0});
            for (int c = 0; c < arity(op); ++c) parse_expr(out);
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')' after operands of '" + std::string(tok) + "'");
            ++pos_;
            return;
        }
        if (text_[pos_] == ')') fail("unexpected ')'");
        out.push_back(terminal(token()));
    }

    void expect_end() {
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters");
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string_view token() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
               text_[pos_] != '(' && text_[pos_] != ')') {
            ++pos_;
        }
        if (start == pos_) fail("expected a token");
        return text_.substr(start, pos_ - start);
    }

    Op function_op(std::string_view tok) {
        static constexpr std::array<std::pair<std::string_view, Op>, 10> kTable{{
            {"+", Op::Add}, {"-", Op::Sub}, {"*", Op::Mul}, {"%", Op::Div}, {"ln", Op::Ln},
            {"exp", Op::Exp}, {"sqrt", Op::Sqrt}, {"cos", Op::Cos}, {"sin", Op::Sin}, {"ncdf", Op::Ncdf},
        }};
        for (const auto& [name, op] : kTable) {
            if (tok == name) return op;
        }
        fail("unknown operator '" + std::string(tok) + "'");
    }

    Node terminal(std::string_view tok) {
        if (tok == "cok" || tok == "pok") return {Op::PriceOverStrike, 0.0};
        if (tok == "sok") return {Op::Moneyness, 0.0};
        if (tok == "tau") return {Op::Tau, 0.0};
        double value = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(value)) {
            fail("unknown terminal '" + std::string(tok) + "'");
        }
        return {Op::Constant, value};
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("expression parse error at offset " + std::to_string(pos_) + ": " + what);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string format(const ExprTree& tree, TerminalBinding binding) {
    std::string out;
    std::size_t i = 0;
    format_into(out, tree.nodes(), i, binding);
    return out;
}

ExprTree parse(std::string_view text) {
    Parser parser(text);
    std::vector<Node> nodes;
    parser.parse_expr(nodes);
    parser.expect_end();
    return ExprTree(std::move(nodes));
}

ExprTree builtin_call_model() {
    return parse(
        "(sqrt (% cok (+ (* sok (* sok (* sok (* sok (* sok sok)))))"
        " (* (* sok (* sok (* sok (* sok sok)))) tau))))");
}

ExprTree builtin_put_model() {
    return parse(
        "(ncdf (- (sin (cos (sin (- (- 0 (cos (sin tau))) (* 2 (ln pok))))))"
        " (exp sok)))");
}

}  // namespace gpvol
