#include <doctest.h>

#include <cmath>
#include <vector>

#include "cocoela/rng.hpp"
#include "cocoela/treegen.hpp"

using namespace cocoela;
using namespace cocoela::treegen;

TEST_CASE("eval_tree examples")
{
    CHECK(eval_tree(ExprNode::mean(ExprNode::variable()), std::vector<double>{1, 2, 3}) == 2.0);
    const auto div = ExprNode::mean(
        ExprNode::binary(BinaryOp::Divide, ExprNode::constant(1), ExprNode::constant(0)));
    CHECK(eval_tree(div, std::vector<double>{7, -3}) == 1.0);
    const auto sq = ExprNode::mean(ExprNode::unary(UnaryOp::Square, ExprNode::variable()));
    CHECK(eval_tree(sq, std::vector<double>{3, 4}) == 12.5);
}

TEST_CASE("protected operators stay finite")
{
    const std::vector<double> x = {0.0, -1e300, 1e300, -3.5};
    for (int u = 0; u < kUnaryOpCount; ++u) {
        const auto t = ExprNode::mean(ExprNode::unary(static_cast<UnaryOp>(u), ExprNode::constant(-1e3)));
        CHECK(std::isfinite(eval_tree(t, x)));
    }
    const auto ln = ExprNode::mean(ExprNode::unary(UnaryOp::Log, ExprNode::variable()));
    CHECK(eval_tree(ln, std::vector<double>{-std::exp(1.0) + 1.0}) == doctest::Approx(1.0));
    const auto rt = ExprNode::mean(ExprNode::unary(UnaryOp::Sqrt, ExprNode::variable()));
    CHECK(eval_tree(rt, std::vector<double>{-9.0}) == 3.0);
    const auto ex = ExprNode::mean(ExprNode::unary(UnaryOp::Exp, ExprNode::constant(100)));
    CHECK(eval_tree(ex, std::vector<double>{0}) == std::exp(50.0));
    const auto small = ExprNode::mean(
        ExprNode::binary(BinaryOp::Divide, ExprNode::constant(5), ExprNode::constant(1e-10)));
    CHECK(eval_tree(small, std::vector<double>{0}) == 1.0);
}

TEST_CASE("forced terminal at max_depth - 1")
{
    GeneratorConfig cfg;
    for (std::uint64_t s = 0; s < 50; ++s) {
        Rng rng(s);
        const auto t = generate_tree(rng, cfg, cfg.max_depth - 1);
        CHECK(t.children.empty());
        CHECK((t.kind == NodeKind::Variable || t.kind == NodeKind::Constant));
    }
}

TEST_CASE("generate_tree is deterministic")
{
    GeneratorConfig cfg;
    Rng a(77);
    Rng b(77);
    CHECK(generate_tree(a, cfg, 1) == generate_tree(b, cfg, 1));
}

TEST_CASE("1000 trees satisfy structural invariants")
{
    GeneratorConfig cfg;
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        auto t = ExprNode::mean(generate_tree(rng, cfg, 1));
        if (!has_variable(t)) {
            continue;  // rejected later by generate_problem
        }
        CHECK(structural_violation(t, cfg.max_depth).empty());
        CHECK(tree_depth(t) <= cfg.max_depth);
    }
}

TEST_CASE("structural_violation catches bad trees")
{
    CHECK_FALSE(structural_violation(ExprNode::variable(), 8).empty());
    CHECK_FALSE(structural_violation(ExprNode::mean(ExprNode::constant(1)), 8).empty());
    CHECK_FALSE(
        structural_violation(ExprNode::mean(ExprNode::mean(ExprNode::variable())), 8).empty());
    auto deep = ExprNode::variable();
    for (int i = 0; i < 9; ++i) {
        deep = ExprNode::unary(UnaryOp::Negate, deep);
    }
    CHECK_FALSE(structural_violation(ExprNode::mean(deep), 8).empty());
}

TEST_CASE("rejection rule")
{
    RejectionRule rule;
    CHECK_FALSE(rejection_reason(std::vector<double>{1, 1, 1}, rule).empty());
    CHECK_FALSE(rejection_reason(std::vector<double>{1, NAN, 2}, rule).empty());
    CHECK_FALSE(rejection_reason(std::vector<double>{1, 2e12, 2}, rule).empty());
    CHECK(rejection_reason(std::vector<double>{1, 2, 3}, rule).empty());
}

TEST_CASE("generate_problem determinism and acceptance soundness")
{
    GeneratorConfig cfg;
    const auto a = generate_problem(42, 0, 10, cfg);
    const auto b = generate_problem(42, 0, 10, cfg);
    CHECK(a == b);
    CHECK(a.attempt_count >= 1);
    CHECK(a.attempt_count <= cfg.rejection.max_attempts);
    CHECK(has_variable(a.tree));
    const RowMatrix pts = acceptance_sample(42, 0, 10);
    CHECK(pts.rows() == 2000);
    std::vector<double> y;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        y.push_back(eval_tree(a.tree, std::span<const double>(pts.row(i).data(), 10)));
    }
    CHECK(rejection_reason(y, cfg.rejection).empty());
}

TEST_CASE("seed isolation and thread invariance")
{
    GeneratorConfig cfg;
    const auto batch = generate_set(7, 12, 3, cfg, 1);
    const auto par = generate_set(7, 12, 3, cfg, 4);
    CHECK(batch == par);
    CHECK(generate_problem(7, 5, 3, cfg) == batch[5]);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        CHECK(batch[i].id.index == i);
        CHECK(batch[i].id.set == SetLabel::Generated);
    }
}

TEST_CASE("exhausted attempts report the index")
{
    GeneratorConfig cfg;
    cfg.rejection.min_variance = 1e300;
    cfg.rejection.max_attempts = 3;
    try {
        generate_problem(1, 9, 2, cfg);
        FAIL("expected GenerationError");
    } catch (const GenerationError& e) {
        CHECK(e.index() == 9);
        CHECK_FALSE(e.reason().empty());
    }
}

TEST_CASE("config validation")
{
    GeneratorConfig cfg;
    cfg.max_depth = 1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.rejection.max_attempts = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.terminal_base_prob = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("json round trip is byte-identical")
{
    const auto set = generate_set(3, 20, 4, GeneratorConfig{});
    const std::string first = problem_set_to_json(set).dump();
    const auto parsed = problem_set_from_json(nlohmann::json::parse(first));
    CHECK(problem_set_to_json(parsed).dump() == first);
    CHECK(parsed == set);
    const auto t = tree_from_json(nlohmann::json::parse(R"(["mean", ["add", ["var"], ["const", 3.25]]])"));
    CHECK(eval_tree(t, std::vector<double>{1, 2}) == 4.75);
    CHECK_THROWS_AS(tree_from_json(nlohmann::json::parse(R"(["mean", ["pow", ["var"]]])")), ValidationError);
}
