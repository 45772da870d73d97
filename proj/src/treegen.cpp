#include "cocoela/treegen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <optional>
#include <string_view>

namespace cocoela::treegen {

namespace {

constexpr std::uint64_t kTagTree = 11;
constexpr std::uint64_t kTagAcceptance = 12;
constexpr std::size_t kAcceptanceMultiplier = 200;

constexpr std::array<std::string_view, kUnaryOpCount> kUnaryNames = {"neg", "abs", "square", "sqrt",
                                                                     "log", "exp", "sin",    "cos"};
constexpr std::array<std::string_view, kBinaryOpCount> kBinaryNames = {"add", "sub", "mul", "div"};

double apply_unary(UnaryOp op, double a)
{
    switch (op) {
    case UnaryOp::Negate: return -a;
    case UnaryOp::Absolute: return std::abs(a);
    case UnaryOp::Square: return a * a;
    case UnaryOp::Sqrt: return std::sqrt(std::abs(a));
    case UnaryOp::Log: return std::log1p(std::abs(a));
    case UnaryOp::Exp: return std::exp(std::clamp(a, -50.0, 50.0));
    case UnaryOp::Sine: return std::sin(a);
    case UnaryOp::Cosine: return std::cos(a);
    }
    return a;
}

double apply_binary(BinaryOp op, double a, double b)
{
    switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Subtract: return a - b;
    case BinaryOp::Multiply: return a * b;
    case BinaryOp::Divide: return std::abs(b) > 1e-9 ? a / b : 1.0;
    }
    return a;
}

// Every operator below the root is elementwise, so coordinate j of any
// intermediate only depends on x_j.
double eval_coordinate(const ExprNode& node, double xj)
{
    switch (node.kind) {
    case NodeKind::Variable: return xj;
    case NodeKind::Constant: return node.value;
    case NodeKind::Unary: return apply_unary(static_cast<UnaryOp>(node.op), eval_coordinate(node.children[0], xj));
    case NodeKind::Binary:
        return apply_binary(static_cast<BinaryOp>(node.op), eval_coordinate(node.children[0], xj),
                            eval_coordinate(node.children[1], xj));
    case NodeKind::Reduce: break;
    }
    throw ValidationError("REDUCE node below the root");
}

}  // namespace

ExprNode ExprNode::variable()
{
    return ExprNode{NodeKind::Variable, 0, 0.0, {}};
}

ExprNode ExprNode::constant(double v)
{
    return ExprNode{NodeKind::Constant, 0, v, {}};
}

ExprNode ExprNode::unary(UnaryOp op, ExprNode child)
{
    ExprNode n{NodeKind::Unary, static_cast<int>(op), 0.0, {}};
    n.children.push_back(std::move(child));
    return n;
}

ExprNode ExprNode::binary(BinaryOp op, ExprNode left, ExprNode right)
{
    ExprNode n{NodeKind::Binary, static_cast<int>(op), 0.0, {}};
    n.children.push_back(std::move(left));
    n.children.push_back(std::move(right));
    return n;
}

ExprNode ExprNode::mean(ExprNode child)
{
    ExprNode n{NodeKind::Reduce, 0, 0.0, {}};
    n.children.push_back(std::move(child));
    return n;
}

void GeneratorConfig::validate() const
{
    if (max_depth < 2) {
        throw ValidationError("generator max_depth must be >= 2");
    }
    if (!(constant_lo <= constant_hi)) {
        throw ValidationError("generator constant_range must satisfy lo <= hi");
    }
    if (!(terminal_base_prob > 0 && terminal_base_prob < 1)) {
        throw ValidationError("generator terminal_base_prob must lie in (0,1)");
    }
    if (!(variable_vs_constant_prob > 0 && variable_vs_constant_prob < 1)) {
        throw ValidationError("generator variable_vs_constant_prob must lie in (0,1)");
    }
    if (rejection.max_attempts < 1) {
        throw ValidationError("generator max_attempts must be >= 1");
    }
    if (!(rejection.value_cap > 0) || !(rejection.min_variance > 0)) {
        throw ValidationError("generator value_cap and min_variance must be positive");
    }
}

GenerationError::GenerationError(std::size_t index, std::string reason)
    : std::runtime_error("problem " + std::to_string(index) + ": generation failed: " + reason),
      index_(index),
      reason_(std::move(reason))
{
}

double eval_tree(const ExprNode& tree, std::span<const double> x)
{
    if (tree.kind != NodeKind::Reduce || tree.children.size() != 1) {
        throw ValidationError("expression tree root must be REDUCE(mean)");
    }
    if (x.empty()) {
        throw ValidationError("cannot evaluate an expression tree on an empty vector");
    }
    double s = 0.0;
    for (double xj : x) {
        s += eval_coordinate(tree.children[0], xj);
    }
    return s / static_cast<double>(x.size());
}

ExprNode generate_tree(Rng& rng, const GeneratorConfig& config, int depth)
{
    const bool forced = depth >= config.max_depth - 1;
    const double p_terminal = std::min(1.0, config.terminal_base_prob * std::ldexp(1.0, depth));
    if (forced || rng.uniform() < p_terminal) {
        if (rng.uniform() < config.variable_vs_constant_prob) {
            return ExprNode::variable();
        }
        return ExprNode::constant(rng.uniform(config.constant_lo, config.constant_hi));
    }
    const auto pick = static_cast<int>(rng.below(kUnaryOpCount + kBinaryOpCount));
    if (pick < kUnaryOpCount) {
        return ExprNode::unary(static_cast<UnaryOp>(pick), generate_tree(rng, config, depth + 1));
    }
    ExprNode left = generate_tree(rng, config, depth + 1);
    ExprNode right = generate_tree(rng, config, depth + 1);
    return ExprNode::binary(static_cast<BinaryOp>(pick - kUnaryOpCount), std::move(left), std::move(right));
}

int tree_depth(const ExprNode& tree)
{
    int deepest = 0;
    for (const auto& c : tree.children) {
        deepest = std::max(deepest, tree_depth(c));
    }
    return deepest + 1;
}

bool has_variable(const ExprNode& tree)
{
    if (tree.kind == NodeKind::Variable) {
        return true;
    }
    return std::any_of(tree.children.begin(), tree.children.end(), [](const ExprNode& c) { return has_variable(c); });
}

namespace {

std::string check_subtree(const ExprNode& node)
{
    switch (node.kind) {
    case NodeKind::Variable:
    case NodeKind::Constant:
        return node.children.empty() ? "" : "leaf with children";
    case NodeKind::Unary:
        if (node.children.size() != 1 || node.op < 0 || node.op >= kUnaryOpCount) {
            return "malformed unary node";
        }
        break;
    case NodeKind::Binary:
        if (node.children.size() != 2 || node.op < 0 || node.op >= kBinaryOpCount) {
            return "malformed binary node";
        }
        break;
    case NodeKind::Reduce:
        return "REDUCE below the root";
    }
    for (const auto& c : node.children) {
        if (auto v = check_subtree(c); !v.empty()) {
            return v;
        }
    }
    return "";
}

}  // namespace

std::string structural_violation(const ExprNode& tree, int max_depth)
{
    if (tree.kind != NodeKind::Reduce || tree.children.size() != 1) {
        return "root is not REDUCE(mean)";
    }
    if (auto v = check_subtree(tree.children[0]); !v.empty()) {
        return v;
    }
    if (tree_depth(tree) > max_depth) {
        return "depth " + std::to_string(tree_depth(tree)) + " exceeds " + std::to_string(max_depth);
    }
    if (!has_variable(tree)) {
        return "no VARIABLE leaf";
    }
    return "";
}

RowMatrix acceptance_sample(std::uint64_t master_seed, std::size_t index, std::size_t dimension)
{
    Rng rng = Rng::stream({master_seed, index, dimension, kTagAcceptance});
    const std::size_t n = kAcceptanceMultiplier * dimension;
    RowMatrix x(n, dimension);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dimension; ++j) {
            x(i, j) = rng.uniform(kDomainLower, kDomainUpper);
        }
    }
    return x;
}

std::string rejection_reason(std::span<const double> y, const RejectionRule& rule)
{
    double sum = 0.0;
    for (double v : y) {
        if (!std::isfinite(v)) {
            return "non-finite value";
        }
        if (std::abs(v) > rule.value_cap) {
            return "value exceeds cap";
        }
        sum += v;
    }
    const double mean = sum / static_cast<double>(y.size());
    double ss = 0.0;
    for (double v : y) {
        ss += (v - mean) * (v - mean);
    }
    if (ss / static_cast<double>(y.size()) < rule.min_variance) {
        return "variance below minimum";
    }
    return "";
}

GeneratedProblem generate_problem(std::uint64_t master_seed, std::size_t index, std::size_t dimension,
                                  const GeneratorConfig& config)
{
    config.validate();
    if (dimension < 1) {
        throw ValidationError("generated problem dimension must be positive");
    }
    Rng rng = Rng::stream({master_seed, index, kTagTree});
    const RowMatrix sample = acceptance_sample(master_seed, index, dimension);
    std::vector<double> y(static_cast<std::size_t>(sample.rows()));

    std::string reason;
    for (int attempt = 1; attempt <= config.rejection.max_attempts; ++attempt) {
        ExprNode tree = ExprNode::mean(generate_tree(rng, config, 1));
        if (!has_variable(tree)) {
            reason = "constant function (no VARIABLE leaf)";
            continue;
        }
        for (Eigen::Index i = 0; i < sample.rows(); ++i) {
            y[static_cast<std::size_t>(i)] = eval_tree(tree, {sample.row(i).data(), dimension});
        }
        reason = rejection_reason(y, config.rejection);
        if (reason.empty()) {
            return GeneratedProblem{{SetLabel::Generated, index}, std::move(tree), dimension, master_seed, attempt};
        }
    }
    throw GenerationError(index, "max_attempts exhausted, last rejection: " + reason);
}

std::vector<GeneratedProblem> generate_set(std::uint64_t master_seed, std::size_t count, std::size_t dimension,
                                           const GeneratorConfig& config, int threads)
{
    if (count < 1) {
        throw ValidationError("generated set count must be >= 1");
    }
    config.validate();
    std::vector<std::optional<GeneratedProblem>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(threads, 1))
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            slots[idx] = generate_problem(master_seed, idx, dimension, config);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    std::vector<GeneratedProblem> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (errors[i]) {
            std::rethrow_exception(errors[i]);
        }
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

nlohmann::json tree_to_json(const ExprNode& tree)
{
    switch (tree.kind) {
    case NodeKind::Variable: return nlohmann::json::array({"var"});
    case NodeKind::Constant: return nlohmann::json::array({"const", tree.value});
    case NodeKind::Unary:
        return nlohmann::json::array({kUnaryNames.at(static_cast<std::size_t>(tree.op)), tree_to_json(tree.children[0])});
    case NodeKind::Binary:
        return nlohmann::json::array({kBinaryNames.at(static_cast<std::size_t>(tree.op)), tree_to_json(tree.children[0]),
                                      tree_to_json(tree.children[1])});
    case NodeKind::Reduce: return nlohmann::json::array({"mean", tree_to_json(tree.children[0])});
    }
    throw InternalError("unknown node kind");
}

ExprNode tree_from_json(const nlohmann::json& j)
{
    if (!j.is_array() || j.empty() || !j[0].is_string()) {
        throw ValidationError("malformed expression tree: " + j.dump());
    }
    const auto head = j[0].get<std::string>();
    const auto arity = j.size() - 1;
    if (head == "var" && arity == 0) {
        return ExprNode::variable();
    }
    if (head == "const" && arity == 1 && j[1].is_number()) {
        return ExprNode::constant(j[1].get<double>());
    }
    if (head == "mean" && arity == 1) {
        return ExprNode::mean(tree_from_json(j[1]));
    }
    for (std::size_t k = 0; k < kUnaryNames.size(); ++k) {
        if (head == kUnaryNames[k] && arity == 1) {
            return ExprNode::unary(static_cast<UnaryOp>(k), tree_from_json(j[1]));
        }
    }
    for (std::size_t k = 0; k < kBinaryNames.size(); ++k) {
        if (head == kBinaryNames[k] && arity == 2) {
            return ExprNode::binary(static_cast<BinaryOp>(k), tree_from_json(j[1]), tree_from_json(j[2]));
        }
    }
    throw ValidationError("unknown expression node '" + head + "' with " + std::to_string(arity) + " arguments");
}

nlohmann::json problem_set_to_json(const std::vector<GeneratedProblem>& problems)
{
    auto arr = nlohmann::json::array();
    for (const auto& p : problems) {
        arr.push_back({{"index", p.id.index},
                       {"seed", p.master_seed},
                       {"dimension", p.dimension},
                       {"attempt_count", p.attempt_count},
                       {"tree", tree_to_json(p.tree)}});
    }
    return arr;
}

std::vector<GeneratedProblem> problem_set_from_json(const nlohmann::json& j)
{
    if (!j.is_array()) {
        throw ValidationError("problem-set file must hold a JSON array");
    }
    std::vector<GeneratedProblem> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        try {
            GeneratedProblem p;
            p.id = {SetLabel::Generated, e.at("index").get<std::size_t>()};
            p.master_seed = e.at("seed").get<std::uint64_t>();
            p.dimension = e.at("dimension").get<std::size_t>();
            p.attempt_count = e.value("attempt_count", 0);
            p.tree = tree_from_json(e.at("tree"));
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& ex) {
            throw ValidationError(std::string("malformed problem-set entry: ") + ex.what());
        }
    }
    return out;
}

}  // namespace cocoela::treegen
