#ifndef COCOELA_ELA_HPP
#define COCOELA_ELA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cocoela/common.hpp"
#include "cocoela/sampling.hpp"

namespace cocoela::ela {

/// A feature value is either finite or std::nullopt (invalid); NaN never
/// leaves this module.
struct Feature {
    std::string name;
    std::optional<double> value;

    bool operator==(const Feature&) const = default;
};

struct FeatureVector {
    ProblemId problem_id;
    std::vector<Feature> values;

    bool operator==(const FeatureVector&) const = default;
};

inline constexpr std::size_t kFeatureCount = 37;

/// The 37 feature names in extraction order.
const std::vector<std::string>& feature_names();

/// Dense symmetric matrix of Euclidean distances between sample rows.
class DistanceMatrix {
public:
    explicit DistanceMatrix(const RowMatrix& x);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

// Each group throws ValidationError when its sample-size precondition
// fails; extract_all turns that into invalid marks.

/// distr.skewness, distr.kurtosis (excess, population moments), distr.n_peaks.
std::vector<Feature> feat_distr(const sampling::SampleSet& s);

/// Linear and pure-quadratic least-squares surrogates. All six are invalid
/// when y is constant; a rank-deficient design invalidates its own fit.
std::vector<Feature> feat_meta(const sampling::SampleSet& s);

std::vector<Feature> feat_disp(const sampling::SampleSet& s);
std::vector<Feature> feat_disp(const sampling::SampleSet& s, const DistanceMatrix& dist);

std::vector<Feature> feat_ic(const sampling::SampleSet& s, std::uint64_t tour_seed);
std::vector<Feature> feat_ic(const sampling::SampleSet& s, std::uint64_t tour_seed, const DistanceMatrix& dist);

std::vector<Feature> feat_nbc(const sampling::SampleSet& s);
std::vector<Feature> feat_nbc(const sampling::SampleSet& s, const DistanceMatrix& dist);

std::vector<Feature> feat_pca(const sampling::SampleSet& s);

FeatureVector extract_all(const sampling::SampleSet& s, std::uint64_t tour_seed);

// Information-content internals, exposed for inspection.

/// {0} followed by 1000 log-spaced values on [1e-5, 1e15].
const std::vector<double>& ic_epsilon_grid();

/// First tour point: the point whose rank in (y, row) order is drawn from
/// tour_seed, so the tour does not depend on row order.
std::size_t ic_tour_start(const sampling::SampleSet& s, std::uint64_t tour_seed);

/// Greedy nearest-unvisited tour; distance ties go to the lower row.
std::vector<std::size_t> nearest_neighbor_tour(const DistanceMatrix& dist, std::size_t start);

struct IcCurve {
    std::vector<double> epsilon;
    std::vector<double> entropy;
    std::vector<double> partial;
    std::size_t slope_count = 0;
};

IcCurve ic_curve(const sampling::SampleSet& s, std::uint64_t tour_seed, const DistanceMatrix& dist);

}  // namespace cocoela::ela

#endif
