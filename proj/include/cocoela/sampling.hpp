#ifndef COCOELA_SAMPLING_HPP
#define COCOELA_SAMPLING_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "cocoela/common.hpp"
#include "cocoela/problem.hpp"

namespace cocoela::sampling {

enum class Strategy { LatinHypercube, Uniform };

struct SamplePlan {
    Strategy strategy = Strategy::LatinHypercube;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

struct SampleSet {
    ProblemId problem_id;
    RowMatrix x;
    Vector y;

    std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t dimension() const { return static_cast<std::size_t>(x.cols()); }
};

/// n x D design inside the box. Latin hypercube places exactly one point in
/// each of the n equal strata of every coordinate.
RowMatrix build_design(const SamplePlan& plan, const BoxBounds& bounds);

/// y[i] = evaluate(problem, X[i]), rows in order. Non-finite values raise
/// InternalError.
SampleSet evaluate_design(const Problem& problem, const RowMatrix& x, int threads = 1);

/// Throws ValidationError when the set breaks a SampleSet invariant.
void validate(const SampleSet& s);

/// CSV with header x1..xD,y; values printed round-trip exact.
void write_csv(std::ostream& out, const SampleSet& s);
SampleSet read_csv(std::istream& in, ProblemId id);

/// <set>_<index>.csv, set in lower case.
std::string file_name(const ProblemId& id);

}  // namespace cocoela::sampling

#endif
