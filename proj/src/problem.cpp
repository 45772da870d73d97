#include "cocoela/problem.hpp"

#include <charconv>
#include <cmath>

namespace cocoela {

std::string_view to_string(SetLabel label)
{
    return label == SetLabel::Coco ? "COCO" : "GENERATED";
}

SetLabel parse_set_label(std::string_view text)
{
    if (text == "COCO") {
        return SetLabel::Coco;
    }
    if (text == "GENERATED") {
        return SetLabel::Generated;
    }
    throw ValidationError("unknown set label '" + std::string(text) + "'");
}

std::string to_string(const ProblemId& id)
{
    return std::string(to_string(id.set)) + "_" + std::to_string(id.index);
}

BoxBounds::BoxBounds(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper))
{
    if (lower_.empty() || lower_.size() != upper_.size()) {
        throw ValidationError("bounds need equal, nonzero lower/upper lengths");
    }
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!(lower_[i] < upper_[i])) {
            throw ValidationError("bounds require lower < upper in coordinate " + std::to_string(i));
        }
    }
}

BoxBounds BoxBounds::cube(std::size_t dimension, double lo, double hi)
{
    return BoxBounds(std::vector<double>(dimension, lo), std::vector<double>(dimension, hi));
}

bool BoxBounds::contains(std::span<const double> x) const
{
    if (x.size() != lower_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) {
            return false;
        }
    }
    return true;
}

std::string format_double(double value)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

Problem::Problem(ProblemId id, BoxBounds bounds, Payload payload)
    : id_(id), bounds_(std::move(bounds)), payload_(std::move(payload))
{
}

double evaluate(const Problem& problem, std::span<const double> x)
{
    if (x.size() != problem.dimension()) {
        throw ValidationError("dimension mismatch for " + to_string(problem.id()) + ": expected " +
                              std::to_string(problem.dimension()) + ", received " + std::to_string(x.size()));
    }
    if (problem.is_bbob()) {
        return problem.bbob()(x);
    }
    return treegen::eval_tree(problem.generated().tree, x);
}

Problem make_bbob(int function_id, std::size_t dimension, std::uint64_t instance_seed)
{
    bbob::BbobInstance inst(function_id, dimension, instance_seed);
    return Problem({SetLabel::Coco, static_cast<std::size_t>(function_id)},
                   BoxBounds::cube(dimension, kDomainLower, kDomainUpper), std::move(inst));
}

std::vector<Problem> bbob_suite(std::size_t dimension, std::uint64_t instance_seed)
{
    std::vector<Problem> out;
    out.reserve(bbob::kFunctionCount);
    for (int f = 1; f <= bbob::kFunctionCount; ++f) {
        out.push_back(make_bbob(f, dimension, instance_seed));
    }
    return out;
}

Problem make_generated(treegen::GeneratedProblem generated)
{
    const ProblemId id = generated.id;
    const std::size_t d = generated.dimension;
    return Problem(id, BoxBounds::cube(d, kDomainLower, kDomainUpper), std::move(generated));
}

nlohmann::json bbob_metadata(const Problem& problem)
{
    const auto& b = problem.bbob();
    return {{"set_label", to_string(problem.id().set)},
            {"index", problem.id().index},
            {"function_id", b.function_id()},
            {"name", bbob::function_name(b.function_id())},
            {"dimension", b.dimension()},
            {"instance_seed", b.rotation_seed()},
            {"f_opt", b.f_opt()},
            {"shift", b.shift()}};
}

Problem bbob_from_metadata(const nlohmann::json& j)
{
    try {
        return make_bbob(j.at("function_id").get<int>(), j.at("dimension").get<std::size_t>(),
                         j.at("instance_seed").get<std::uint64_t>());
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError(std::string("malformed BBOB metadata: ") + ex.what());
    }
}

}  // namespace cocoela
