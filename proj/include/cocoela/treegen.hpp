#ifndef COCOELA_TREEGEN_HPP
#define COCOELA_TREEGEN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cocoela/common.hpp"
#include "cocoela/rng.hpp"

namespace cocoela::treegen {

enum class NodeKind { Variable, Constant, Unary, Binary, Reduce };

enum class UnaryOp { Negate, Absolute, Square, Sqrt, Log, Exp, Sine, Cosine };
enum class BinaryOp { Add, Subtract, Multiply, Divide };

inline constexpr int kUnaryOpCount = 8;
inline constexpr int kBinaryOpCount = 4;

/// Expression tree over the whole decision vector. Intermediates are
/// vectors (VARIABLE is x itself, CONSTANT broadcasts), every operator is
/// elementwise and the root REDUCE(mean) collapses to a scalar.
struct ExprNode {
    NodeKind kind = NodeKind::Constant;
    /// UnaryOp or BinaryOp, cast to int; unused for other kinds.
    int op = 0;
    /// Payload of a CONSTANT leaf.
    double value = 0.0;
    std::vector<ExprNode> children;

    static ExprNode variable();
    static ExprNode constant(double v);
    static ExprNode unary(UnaryOp op, ExprNode child);
    static ExprNode binary(BinaryOp op, ExprNode left, ExprNode right);
    static ExprNode mean(ExprNode child);

    bool operator==(const ExprNode&) const = default;
};

struct RejectionRule {
    double value_cap = 1e12;
    double min_variance = 1e-12;
    int max_attempts = 100;
};

struct GeneratorConfig {
    int max_depth = 8;
    double constant_lo = -10.0;
    double constant_hi = 10.0;
    double terminal_base_prob = 0.15;
    double variable_vs_constant_prob = 0.5;
    RejectionRule rejection;

    /// Throws ValidationError when an invariant is violated.
    void validate() const;
};

struct GeneratedProblem {
    ProblemId id;
    ExprNode tree;
    std::size_t dimension = 0;
    std::uint64_t master_seed = 0;
    int attempt_count = 0;

    bool operator==(const GeneratedProblem&) const = default;
};

class GenerationError : public std::runtime_error {
public:
    GenerationError(std::size_t index, std::string reason);
    std::size_t index() const { return index_; }
    const std::string& reason() const { return reason_; }

private:
    std::size_t index_;
    std::string reason_;
};

double eval_tree(const ExprNode& tree, std::span<const double> x);

ExprNode generate_tree(Rng& rng, const GeneratorConfig& config, int depth);

/// Number of nodes on the longest root-to-leaf path.
int tree_depth(const ExprNode& tree);
bool has_variable(const ExprNode& tree);
/// Empty when the tree satisfies every structural invariant, otherwise the
/// first violation found.
std::string structural_violation(const ExprNode& tree, int max_depth);

/// The 200*D uniform points in [-5,5]^D a candidate tree is screened on.
/// Depends only on (master_seed, index, dimension), so an accepted
/// problem can be re-checked later.
RowMatrix acceptance_sample(std::uint64_t master_seed, std::size_t index, std::size_t dimension);

/// Empty when y passes the rejection rule, otherwise the rejection reason.
std::string rejection_reason(std::span<const double> y, const RejectionRule& rule);

GeneratedProblem generate_problem(std::uint64_t master_seed, std::size_t index, std::size_t dimension,
                                  const GeneratorConfig& config);

/// Indices 0..count-1. Output is identical for any thread count.
std::vector<GeneratedProblem> generate_set(std::uint64_t master_seed, std::size_t count, std::size_t dimension,
                                           const GeneratorConfig& config, int threads = 1);

/// ["mean", ["add", ["var"], ["const", 3.25]]]
nlohmann::json tree_to_json(const ExprNode& tree);
ExprNode tree_from_json(const nlohmann::json& j);

nlohmann::json problem_set_to_json(const std::vector<GeneratedProblem>& problems);
std::vector<GeneratedProblem> problem_set_from_json(const nlohmann::json& j);

}  // namespace cocoela::treegen

#endif
