#ifndef COCOELA_PROBLEM_HPP
#define COCOELA_PROBLEM_HPP

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cocoela/bbob.hpp"
#include "cocoela/common.hpp"
#include "cocoela/treegen.hpp"

namespace cocoela {

/// An evaluatable objective over a box. Immutable once built, so one
/// instance may be evaluated from many threads at once.
class Problem {
public:
    using Payload = std::variant<bbob::BbobInstance, treegen::GeneratedProblem>;

    Problem(ProblemId id, BoxBounds bounds, Payload payload);

    const ProblemId& id() const { return id_; }
    std::size_t dimension() const { return bounds_.dimension(); }
    const BoxBounds& bounds() const { return bounds_; }
    const Payload& payload() const { return payload_; }

    bool is_bbob() const { return std::holds_alternative<bbob::BbobInstance>(payload_); }
    const bbob::BbobInstance& bbob() const { return std::get<bbob::BbobInstance>(payload_); }
    const treegen::GeneratedProblem& generated() const { return std::get<treegen::GeneratedProblem>(payload_); }

private:
    ProblemId id_;
    BoxBounds bounds_;
    Payload payload_;
};

/// Throws ValidationError naming both dimensions when x has the wrong length.
double evaluate(const Problem& problem, std::span<const double> x);

Problem make_bbob(int function_id, std::size_t dimension, std::uint64_t instance_seed);

/// Functions 1..24 in order, all on [-5,5]^D.
std::vector<Problem> bbob_suite(std::size_t dimension, std::uint64_t instance_seed);

Problem make_generated(treegen::GeneratedProblem generated);

/// {set_label, index, function_id, dimension, instance_seed, f_opt, shift}
nlohmann::json bbob_metadata(const Problem& problem);
/// Rebuilds a BBOB problem from its metadata record.
Problem bbob_from_metadata(const nlohmann::json& j);

}  // namespace cocoela

#endif
