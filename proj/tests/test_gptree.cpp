#include <gtest/gtest.h>

#include <cfloat>
#include <cmath>

#include "gpvol/errors.hpp"
#include "gpvol/gptree.hpp"
#include "gpvol/protected_ops.hpp"

using namespace gpvol;

TEST(ProtectedOps, DivisionByZeroIsOne) {
    EXPECT_EQ(protected_ops::div(3.0, 0.0), 1.0);
    EXPECT_EQ(protected_ops::div(6.0, 3.0), 2.0);
}

TEST(ProtectedOps, LogExpSqrtAreTotal) {
    EXPECT_EQ(protected_ops::ln(0.0), 0.0);
    EXPECT_DOUBLE_EQ(protected_ops::ln(-std::exp(2.0)), 2.0);
    EXPECT_TRUE(std::isfinite(protected_ops::exp(1e6)));
    EXPECT_DOUBLE_EQ(protected_ops::sqrt(-4.0), 2.0);
    EXPECT_EQ(protected_ops::saturate(std::numeric_limits<double>::infinity()), DBL_MAX);
    EXPECT_EQ(protected_ops::saturate(-std::numeric_limits<double>::infinity()), -DBL_MAX);
    EXPECT_EQ(protected_ops::saturate(std::nan("")), 0.0);
}

TEST(ExprTree, ValidatesPrefixArity) {
    EXPECT_THROW(ExprTree({{Op::Add, 0}, {Op::Tau, 0}}), ParseError);
    EXPECT_THROW(ExprTree({{Op::Tau, 0}, {Op::Tau, 0}}), ParseError);
    EXPECT_THROW(ExprTree(std::vector<Node>{}), ParseError);
    EXPECT_NO_THROW(ExprTree({{Op::Add, 0}, {Op::Tau, 0}, {Op::Moneyness, 0}}));
}

TEST(ExprTree, DepthAndSubtreeBounds) {
    const ExprTree t = parse("(+ (* sok tau) (sqrt cok))");
    EXPECT_EQ(t.size(), 6u);
    EXPECT_EQ(t.depth(), 3);
    EXPECT_EQ(t.subtree_end(0), 6u);
    EXPECT_EQ(t.subtree_end(1), 4u);
    EXPECT_EQ(t.subtree_end(4), 6u);
    EXPECT_EQ(t.node_levels(), (std::vector<int>{1, 2, 3, 3, 2, 3}));
}

TEST(ExprTree, EvalArithmetic) {
    const ExprTree t = parse("(- (% cok sok) (* tau 2))");
    EXPECT_DOUBLE_EQ(eval(t, {0.5, 2.0, 0.25}), 0.25 - 0.5);
}

TEST(ExprTree, FormatParseRoundTrip) {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const ExprTree t = random_tree(6, i % 2 ? InitMethod::Grow : InitMethod::Full, rng);
        EXPECT_EQ(parse(format(t)), t);
        EXPECT_EQ(parse(format(t, TerminalBinding::Put)), t);
    }
    const ExprTree c = parse("(* 2.5 (- 0 -1e-3))");
    EXPECT_EQ(parse(format(c)), c);
}

TEST(ExprTree, ParseErrors) {
    EXPECT_THROW(parse("(+ sok)"), ParseError);
    EXPECT_THROW(parse("(foo sok)"), ParseError);
    EXPECT_THROW(parse("(sqrt sok"), ParseError);
    EXPECT_THROW(parse("sok tau"), ParseError);
    EXPECT_THROW(parse(""), ParseError);
}

TEST(ExprTree, BuiltinCallModelArithmetic) {
    // sqrt(0.05 / (1 + 1 * 0.25)) = sqrt(0.04)
    EXPECT_NEAR(eval(builtin_call_model(), {0.05, 1.0, 0.25}), 0.2, 1e-15);
}

TEST(ExprTree, BuiltinPutModelIsAProbability) {
    Rng rng(11);
    for (int i = 0; i < 20000; ++i) {
        const double v = eval(builtin_put_model(), {rng.uniform(1e-6, 1.0), rng.uniform(0.01, 3.5),
                                                    rng.uniform(1e-6, 3.0)});
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(RandomTree, RespectsDepthAndMethod) {
    Rng rng(5);
    for (int d = 1; d <= 6; ++d) {
        for (int i = 0; i < 50; ++i) {
            const ExprTree full = random_tree(d, InitMethod::Full, rng);
            EXPECT_EQ(full.depth(), d);
            const ExprTree grow = random_tree(d, InitMethod::Grow, rng);
            EXPECT_LE(grow.depth(), d);
            for (const Node& n : grow.nodes()) EXPECT_NE(n.op, Op::Constant);
        }
    }
}

TEST(Crossover, SwapsSubtrees) {
    const ExprTree a = parse("(+ sok tau)");
    const ExprTree b = parse("(* cok (sqrt tau))");
    const auto [c1, c2] = crossover_at(a, 2, b, 2);
    EXPECT_EQ(c1, parse("(+ sok (sqrt tau))"));
    EXPECT_EQ(c2, parse("(* cok tau)"));
}

TEST(Crossover, NeverExceedsDepthLimit) {
    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
        const ExprTree a = random_tree(6, InitMethod::Full, rng);
        const ExprTree b = random_tree(6, InitMethod::Full, rng);
        const auto [c1, c2] = crossover(a, b, rng, 8);
        EXPECT_LE(c1.depth(), 8);
        EXPECT_LE(c2.depth(), 8);
        EXPECT_EQ(c1.size() + c2.size(), a.size() + b.size());
    }
}

TEST(Mutation, PointKeepsShape) {
    Rng rng(23);
    for (int i = 0; i < 300; ++i) {
        const ExprTree t = random_tree(5, InitMethod::Grow, rng);
        const ExprTree m = mutate(t, MutationKind::Point, rng);
        ASSERT_EQ(m.size(), t.size());
        int changed = 0;
        for (std::size_t j = 0; j < t.size(); ++j) {
            EXPECT_EQ(arity(m.nodes()[j].op), arity(t.nodes()[j].op));
            changed += !(m.nodes()[j] == t.nodes()[j]);
        }
        EXPECT_EQ(changed, 1);
    }
}

TEST(Mutation, BranchAndExpansionRespectDepth) {
    Rng rng(29);
    for (int i = 0; i < 300; ++i) {
        const ExprTree t = random_tree(6, InitMethod::Full, rng);
        EXPECT_LE(mutate(t, MutationKind::Branch, rng, 10).depth(), 10);
        EXPECT_LE(mutate(t, MutationKind::Expansion, rng, 10).depth(), 10);
    }
}

TEST(Eval, TotalOnRandomTrees) {
    Rng rng(31);
    for (int i = 0; i < 2000; ++i) {
        ExprTree t = random_tree(6, InitMethod::Grow, rng);
        for (int j = 0; j < 3; ++j) t = mutate(t, MutationKind::Expansion, rng);
        const double x = eval(t, {rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3)});
        EXPECT_TRUE(std::isfinite(x));
    }
}
