#ifndef COCOELA_SUBSPACE_HPP
#define COCOELA_SUBSPACE_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cocoela/common.hpp"
#include "cocoela/ela.hpp"

namespace cocoela::subspace {

/// Problems x features with an explicit validity mask.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::vector<ProblemId> rows, std::vector<std::string> columns);

    static FeatureMatrix from_vectors(const std::vector<ela::FeatureVector>& vectors);
    /// Fully valid matrix from dense data.
    static FeatureMatrix dense(std::vector<ProblemId> rows, std::vector<std::string> columns, Matrix data);

    std::size_t row_count() const { return rows_.size(); }
    std::size_t column_count() const { return columns_.size(); }
    const std::vector<ProblemId>& rows() const { return rows_; }
    const std::vector<std::string>& columns() const { return columns_; }

    std::optional<double> at(std::size_t r, std::size_t c) const;
    void set(std::size_t r, std::size_t c, std::optional<double> v);
    bool all_valid() const;
    /// Dense values; throws ValidationError if any entry is invalid.
    Matrix values() const;

    FeatureMatrix select_columns(const std::vector<std::size_t>& keep) const;
    /// Rows of `a` followed by rows of `b`; columns must match.
    static FeatureMatrix concat(const FeatureMatrix& a, const FeatureMatrix& b);
    /// Rows whose set label equals `label`, in order.
    FeatureMatrix select_set(SetLabel label) const;

private:
    std::vector<ProblemId> rows_;
    std::vector<std::string> columns_;
    Matrix data_;
    std::vector<char> valid_;
};

struct CleanResult {
    FeatureMatrix a;
    FeatureMatrix b;
    std::vector<std::string> dropped;
};

/// Drops every column with an invalid entry in either matrix.
CleanResult clean_columns(const FeatureMatrix& a, const FeatureMatrix& b);

struct ScalingParams {
    std::string owner;
    std::vector<std::string> columns;
    Vector min;
    Vector max;

    bool is_constant(std::size_t c) const { return max[static_cast<Eigen::Index>(c)] == min[static_cast<Eigen::Index>(c)]; }
};

ScalingParams minmax_fit(const FeatureMatrix& m, std::string owner);
/// (v - min) / (max - min), constant columns map to 0.5. Not clamped.
Matrix minmax_apply(const FeatureMatrix& m, const ScalingParams& p);

struct SvdModel {
    std::string owner;
    ScalingParams scaling;
    /// features x k, orthonormal columns.
    Matrix basis;
    /// Leading k singular values.
    Vector singular_values;
    /// Every singular value of the scaled owner matrix.
    Vector all_singular_values;
    std::size_t k = 0;
    double energy_threshold = 0.95;
};

/// Smallest k whose leading singular values hold `threshold` of the energy.
std::size_t truncation_rank(const Vector& singular_values, double threshold);

/// Thin SVD of the scaled owner matrix, no centering. Basis column signs
/// make each column's largest-magnitude entry positive.
SvdModel svd_fit(const Matrix& scaled, const ScalingParams& scaling, double energy_threshold);

/// Scale with the model's parameters, then multiply by the basis.
Matrix project(const FeatureMatrix& m, const SvdModel& model);

enum class ProjectionMode { CocoIntoGenerated, GeneratedIntoCoco, Joint };

std::string_view to_string(ProjectionMode mode);
/// Accepts coco-into-gen, gen-into-coco, joint.
ProjectionMode parse_mode(std::string_view text);
inline constexpr ProjectionMode kAllModes[] = {ProjectionMode::CocoIntoGenerated, ProjectionMode::GeneratedIntoCoco,
                                               ProjectionMode::Joint};

struct ProjectedSet {
    ProjectionMode mode;
    /// COCO rows first, then generated rows.
    std::vector<ProblemId> rows;
    Matrix coordinates;
    SvdModel model;
};

ProjectedSet run_projection(ProjectionMode mode, const FeatureMatrix& coco, const FeatureMatrix& gen,
                            double energy_threshold);

nlohmann::json model_to_json(const SvdModel& model);
SvdModel model_from_json(const nlohmann::json& j);

}  // namespace cocoela::subspace

#endif
