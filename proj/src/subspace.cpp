#include "cocoela/subspace.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace cocoela::subspace {

FeatureMatrix::FeatureMatrix(std::vector<ProblemId> rows, std::vector<std::string> columns)
    : rows_(std::move(rows)),
      columns_(std::move(columns)),
      data_(Matrix::Zero(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(columns_.size()))),
      valid_(rows_.size() * columns_.size(), 0)
{
    auto sorted = rows_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ValidationError("feature matrix row ids must be unique");
    }
}

FeatureMatrix FeatureMatrix::from_vectors(const std::vector<ela::FeatureVector>& vectors)
{
    if (vectors.empty()) {
        throw ValidationError("feature matrix needs at least one problem");
    }
    std::vector<std::string> columns;
    for (const auto& f : vectors.front().values) {
        columns.push_back(f.name);
    }
    std::vector<ProblemId> rows;
    for (const auto& v : vectors) {
        rows.push_back(v.problem_id);
    }
    FeatureMatrix m(std::move(rows), std::move(columns));
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        const auto& vals = vectors[r].values;
        if (vals.size() != m.column_count()) {
            throw ValidationError("feature vectors disagree on feature count");
        }
        for (std::size_t c = 0; c < vals.size(); ++c) {
            if (vals[c].name != m.columns_[c]) {
                throw ValidationError("feature vectors disagree on feature order at '" + vals[c].name + "'");
            }
            m.set(r, c, vals[c].value);
        }
    }
    return m;
}

FeatureMatrix FeatureMatrix::dense(std::vector<ProblemId> rows, std::vector<std::string> columns, Matrix data)
{
    FeatureMatrix m(std::move(rows), std::move(columns));
    if (data.rows() != static_cast<Eigen::Index>(m.row_count()) ||
        data.cols() != static_cast<Eigen::Index>(m.column_count())) {
        throw ValidationError("dense feature data has the wrong shape");
    }
    for (std::size_t r = 0; r < m.row_count(); ++r) {
        for (std::size_t c = 0; c < m.column_count(); ++c) {
            m.set(r, c, data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        }
    }
    return m;
}

std::optional<double> FeatureMatrix::at(std::size_t r, std::size_t c) const
{
    if (!valid_[r * columns_.size() + c]) {
        return std::nullopt;
    }
    return data_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

void FeatureMatrix::set(std::size_t r, std::size_t c, std::optional<double> v)
{
    const bool ok = v.has_value() && std::isfinite(*v);
    valid_[r * columns_.size() + c] = ok ? 1 : 0;
    data_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ok ? *v : 0.0;
}

bool FeatureMatrix::all_valid() const
{
    return std::all_of(valid_.begin(), valid_.end(), [](char v) { return v != 0; });
}

Matrix FeatureMatrix::values() const
{
    if (!all_valid()) {
        throw ValidationError("feature matrix holds invalid entries; clean it first");
    }
    return data_;
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<std::size_t>& keep) const
{
    std::vector<std::string> cols;
    for (auto c : keep) {
        cols.push_back(columns_.at(c));
    }
    FeatureMatrix out(rows_, std::move(cols));
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        for (std::size_t k = 0; k < keep.size(); ++k) {
            out.set(r, k, at(r, keep[k]));
        }
    }
    return out;
}

FeatureMatrix FeatureMatrix::concat(const FeatureMatrix& a, const FeatureMatrix& b)
{
    if (a.columns_ != b.columns_) {
        throw ValidationError("cannot stack feature matrices with different columns");
    }
    auto rows = a.rows_;
    rows.insert(rows.end(), b.rows_.begin(), b.rows_.end());
    FeatureMatrix out(std::move(rows), a.columns_);
    for (std::size_t r = 0; r < a.row_count(); ++r) {
        for (std::size_t c = 0; c < a.column_count(); ++c) {
            out.set(r, c, a.at(r, c));
        }
    }
    for (std::size_t r = 0; r < b.row_count(); ++r) {
        for (std::size_t c = 0; c < b.column_count(); ++c) {
            out.set(a.row_count() + r, c, b.at(r, c));
        }
    }
    return out;
}

FeatureMatrix FeatureMatrix::select_set(SetLabel label) const
{
    std::vector<std::size_t> idx;
    std::vector<ProblemId> rows;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r].set == label) {
            idx.push_back(r);
            rows.push_back(rows_[r]);
        }
    }
    FeatureMatrix out(std::move(rows), columns_);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            out.set(k, c, at(idx[k], c));
        }
    }
    return out;
}

CleanResult clean_columns(const FeatureMatrix& a, const FeatureMatrix& b)
{
    if (a.columns() != b.columns()) {
        throw ValidationError("clean_columns needs identical column sets");
    }
    std::vector<std::size_t> keep;
    std::vector<std::string> dropped;
    for (std::size_t c = 0; c < a.column_count(); ++c) {
        bool ok = true;
        for (const auto* m : {&a, &b}) {
            for (std::size_t r = 0; r < m->row_count() && ok; ++r) {
                ok = m->at(r, c).has_value();
            }
        }
        if (ok) {
            keep.push_back(c);
        } else {
            dropped.push_back(a.columns()[c]);
        }
    }
    if (keep.size() < 3) {
        throw ValidationError("only " + std::to_string(keep.size()) +
                              " feature columns survive cleaning; at least 3 are needed");
    }
    return {a.select_columns(keep), b.select_columns(keep), std::move(dropped)};
}

ScalingParams minmax_fit(const FeatureMatrix& m, std::string owner)
{
    const Matrix v = m.values();
    if (v.rows() == 0) {
        throw ValidationError("cannot fit scaling on an empty matrix");
    }
    return ScalingParams{std::move(owner), m.columns(), v.colwise().minCoeff().transpose(),
                         v.colwise().maxCoeff().transpose()};
}

Matrix minmax_apply(const FeatureMatrix& m, const ScalingParams& p)
{
    if (m.columns() != p.columns) {
        std::string bad;
        for (const auto& c : m.columns()) {
            if (std::find(p.columns.begin(), p.columns.end(), c) == p.columns.end()) {
                bad += (bad.empty() ? "" : ", ") + c;
            }
        }
        for (const auto& c : p.columns) {
            if (std::find(m.columns().begin(), m.columns().end(), c) == m.columns().end()) {
                bad += (bad.empty() ? "" : ", ") + c;
            }
        }
        throw ValidationError("feature columns do not match the " + p.owner + " model" +
                              (bad.empty() ? std::string(" (order differs)") : ": " + bad));
    }
    Matrix v = m.values();
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        const double lo = p.min[c];
        const double range = p.max[c] - lo;
        if (range == 0.0) {
            v.col(c).setConstant(0.5);
        } else {
            v.col(c) = (v.col(c).array() - lo) / range;
        }
    }
    return v;
}

std::size_t truncation_rank(const Vector& singular_values, double threshold)
{
    const Vector energy = singular_values.array().square();
    const double total = energy.sum();
    if (!(total > 0)) {
        throw ValidationError("cannot truncate an all-zero spectrum");
    }
    // Relative slack absorbs rounding in the running sum when the
    // threshold is 1.
    const double target = threshold * total * (1.0 - 1e-12);
    double cum = 0.0;
    for (Eigen::Index i = 0; i < energy.size(); ++i) {
        cum += energy[i];
        if (cum >= target) {
            return static_cast<std::size_t>(i + 1);
        }
    }
    return static_cast<std::size_t>(energy.size());
}

SvdModel svd_fit(const Matrix& scaled, const ScalingParams& scaling, double energy_threshold)
{
    if (scaled.rows() < 2) {
        throw ValidationError("SVD needs at least two rows");
    }
    if (!(energy_threshold > 0 && energy_threshold <= 1)) {
        throw ValidationError("energy_threshold must lie in (0, 1]");
    }
    if (!scaled.allFinite()) {
        throw ValidationError("SVD input holds non-finite values");
    }
    Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeThinV);
    const Vector sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] <= 1e-12 * std::max(1.0, scaled.cwiseAbs().maxCoeff())) {
        throw ValidationError("SVD input is numerically zero");
    }
    SvdModel model;
    model.owner = scaling.owner;
    model.scaling = scaling;
    model.energy_threshold = energy_threshold;
    model.all_singular_values = sv;
    model.k = truncation_rank(sv, energy_threshold);
    // Only strictly positive singular values carry a direction.
    const double tol = sv[0] * 1e-13 * static_cast<double>(std::max(scaled.rows(), scaled.cols()));
    while (model.k > 1 && sv[static_cast<Eigen::Index>(model.k) - 1] <= tol) {
        --model.k;
    }
    const auto k = static_cast<Eigen::Index>(model.k);
    model.singular_values = sv.head(k);
    model.basis = svd.matrixV().leftCols(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::Index arg = 0;
        model.basis.col(j).cwiseAbs().maxCoeff(&arg);
        if (model.basis(arg, j) < 0) {
            model.basis.col(j) = -model.basis.col(j);
        }
    }
    return model;
}

Matrix project(const FeatureMatrix& m, const SvdModel& model)
{
    return minmax_apply(m, model.scaling) * model.basis;
}

std::string_view to_string(ProjectionMode mode)
{
    switch (mode) {
    case ProjectionMode::CocoIntoGenerated: return "coco-into-gen";
    case ProjectionMode::GeneratedIntoCoco: return "gen-into-coco";
    case ProjectionMode::Joint: return "joint";
    }
    return "unknown";
}

ProjectionMode parse_mode(std::string_view text)
{
    for (auto m : kAllModes) {
        if (to_string(m) == text) {
            return m;
        }
    }
    throw ValidationError("unknown projection mode '" + std::string(text) +
                          "'; expected coco-into-gen, gen-into-coco or joint");
}

ProjectedSet run_projection(ProjectionMode mode, const FeatureMatrix& coco, const FeatureMatrix& gen,
                            double energy_threshold)
{
    const FeatureMatrix both = FeatureMatrix::concat(coco, gen);
    const FeatureMatrix* owner = nullptr;
    std::string owner_label;
    switch (mode) {
    case ProjectionMode::CocoIntoGenerated:
        owner = &gen;
        owner_label = "GENERATED";
        break;
    case ProjectionMode::GeneratedIntoCoco:
        owner = &coco;
        owner_label = "COCO";
        break;
    case ProjectionMode::Joint:
        owner = &both;
        owner_label = "JOINT";
        break;
    }
    const ScalingParams params = minmax_fit(*owner, owner_label);
    SvdModel model = svd_fit(minmax_apply(*owner, params), params, energy_threshold);
    Matrix coords = project(both, model);
    return ProjectedSet{mode, both.rows(), std::move(coords), std::move(model)};
}

nlohmann::json model_to_json(const SvdModel& model)
{
    std::vector<double> basis;
    for (Eigen::Index r = 0; r < model.basis.rows(); ++r) {
        for (Eigen::Index c = 0; c < model.basis.cols(); ++c) {
            basis.push_back(model.basis(r, c));
        }
    }
    const auto to_vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return {{"owner", model.owner},
            {"k", model.k},
            {"energy_threshold", model.energy_threshold},
            {"features", model.scaling.columns},
            {"scaling", {{"min", to_vec(model.scaling.min)}, {"max", to_vec(model.scaling.max)}}},
            {"singular_values", to_vec(model.singular_values)},
            {"all_singular_values", to_vec(model.all_singular_values)},
            {"basis_shape", {model.basis.rows(), model.basis.cols()}},
            {"basis", basis}};
}

SvdModel model_from_json(const nlohmann::json& j)
{
    try {
        const auto to_eigen = [](const std::vector<double>& v) {
            return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
        };
        SvdModel m;
        m.owner = j.at("owner").get<std::string>();
        m.k = j.at("k").get<std::size_t>();
        m.energy_threshold = j.at("energy_threshold").get<double>();
        m.scaling.owner = m.owner;
        m.scaling.columns = j.at("features").get<std::vector<std::string>>();
        m.scaling.min = to_eigen(j.at("scaling").at("min").get<std::vector<double>>());
        m.scaling.max = to_eigen(j.at("scaling").at("max").get<std::vector<double>>());
        m.singular_values = to_eigen(j.at("singular_values").get<std::vector<double>>());
        m.all_singular_values = to_eigen(j.at("all_singular_values").get<std::vector<double>>());
        const auto shape = j.at("basis_shape").get<std::vector<Eigen::Index>>();
        const auto flat = j.at("basis").get<std::vector<double>>();
        if (shape.size() != 2 || static_cast<std::size_t>(shape[0] * shape[1]) != flat.size()) {
            throw ValidationError("SVD model basis has an inconsistent shape");
        }
        m.basis = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            flat.data(), shape[0], shape[1]);
        return m;
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError(std::string("malformed SVD model: ") + ex.what());
    }
}

}  // namespace cocoela::subspace
