#include <doctest.h>

#include <cmath>

#include <Eigen/SVD>

#include "cocoela/rng.hpp"
#include "cocoela/subspace.hpp"

using namespace cocoela;
using namespace cocoela::subspace;

namespace {

std::vector<ProblemId> ids(SetLabel set, std::size_t n)
{
    std::vector<ProblemId> v;
    for (std::size_t i = 0; i < n; ++i) {
        v.push_back({set, i + 1});
    }
    return v;
}

std::vector<std::string> cols(std::size_t n)
{
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) {
        v.push_back("f" + std::to_string(i));
    }
    return v;
}

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double lo = 0, double hi = 1)
{
    Rng rng(seed);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = rng.uniform(lo, hi);
        }
    }
    return m;
}

void check_model(const SvdModel& m, const Matrix& scaled)
{
    const auto k = static_cast<Eigen::Index>(m.k);
    REQUIRE(m.basis.cols() == k);
    const Matrix gram = m.basis.transpose() * m.basis - Matrix::Identity(k, k);
    CHECK(gram.cwiseAbs().maxCoeff() < 1e-10);
    for (Eigen::Index i = 1; i < m.singular_values.size(); ++i) {
        CHECK(m.singular_values[i] <= m.singular_values[i - 1]);
    }
    const double total = m.all_singular_values.squaredNorm();
    const double kept = m.all_singular_values.head(k).squaredNorm();
    CHECK(kept >= m.energy_threshold * total * (1 - 1e-12));
    if (k > 1) {
        CHECK(m.all_singular_values.head(k - 1).squaredNorm() < m.energy_threshold * total);
    }
    for (Eigen::Index c = 0; c < k; ++c) {
        Eigen::Index arg = 0;
        m.basis.col(c).cwiseAbs().maxCoeff(&arg);
        CHECK(m.basis(arg, c) > 0);
    }
    (void)scaled;
}

}  // namespace

TEST_CASE("clean_columns")
{
    auto a = FeatureMatrix::dense(ids(SetLabel::Coco, 3), cols(5), random_matrix(3, 5, 1));
    auto b = FeatureMatrix::dense(ids(SetLabel::Generated, 4), cols(5), random_matrix(4, 5, 2));
    auto r = clean_columns(a, b);
    CHECK(r.dropped.empty());
    CHECK(r.a.values() == a.values());
    CHECK(r.b.values() == b.values());

    b.set(2, 1, std::nullopt);
    a.set(0, 3, std::nullopt);
    r = clean_columns(a, b);
    CHECK(r.dropped == std::vector<std::string>{"f1", "f3"});
    CHECK(r.a.columns() == std::vector<std::string>{"f0", "f2", "f4"});
    CHECK(r.b.all_valid());

    a.set(1, 0, std::nullopt);
    CHECK_THROWS_AS(clean_columns(a, b), ValidationError);
    auto other = FeatureMatrix::dense(ids(SetLabel::Generated, 4), cols(6), random_matrix(4, 6, 2));
    CHECK_THROWS_AS(clean_columns(a, other), ValidationError);
}

TEST_CASE("minmax scaling examples")
{
    Matrix d(3, 2);
    d << 2, 3, 4, 3, 6, 3;
    const auto m = FeatureMatrix::dense(ids(SetLabel::Coco, 3), cols(2), d);
    const auto p = minmax_fit(m, "COCO");
    CHECK(p.is_constant(1));
    const Matrix s = minmax_apply(m, p);
    CHECK(s(0, 0) == 0.0);
    CHECK(s(1, 0) == 0.5);
    CHECK(s(2, 0) == 1.0);
    CHECK(s(0, 1) == 0.5);

    Matrix e(1, 2);
    e << 10, 3;
    const Matrix out = minmax_apply(FeatureMatrix::dense(ids(SetLabel::Generated, 1), cols(2), e), p);
    CHECK(out(0, 0) == 2.0);

    const auto wrong = FeatureMatrix::dense(ids(SetLabel::Coco, 1), {"f0", "zz"}, e);
    CHECK_THROWS_AS(minmax_apply(wrong, p), ValidationError);
}

TEST_CASE("svd_fit examples")
{
    const auto scaling = minmax_fit(FeatureMatrix::dense(ids(SetLabel::Coco, 2), cols(2), Matrix::Identity(2, 2)), "COCO");
    auto m = svd_fit(Matrix::Identity(2, 2), scaling, 1.0);
    CHECK(m.all_singular_values[0] == doctest::Approx(1.0));
    CHECK(m.all_singular_values[1] == doctest::Approx(1.0));

    Matrix r1 = Eigen::Vector3d(1, 2, 3) * Eigen::RowVector4d(0.5, 0.1, 0.2, 0.9);
    const auto sc4 = minmax_fit(FeatureMatrix::dense(ids(SetLabel::Coco, 3), cols(4), r1), "COCO");
    m = svd_fit(r1, sc4, 0.95);
    CHECK(m.k == 1);

    const Matrix a = random_matrix(24, 30, 5);
    const auto sc30 = minmax_fit(FeatureMatrix::dense(ids(SetLabel::Coco, 24), cols(30), a), "COCO");
    m = svd_fit(a, sc30, 1.0);
    check_model(m, a);
    const Matrix us = a * m.basis;
    CHECK((us * m.basis.transpose() - a).norm() < 1e-8);

    CHECK_THROWS_AS(svd_fit(Matrix::Zero(3, 4), sc4, 0.95), ValidationError);
}

TEST_CASE("truncation_rank is minimal")
{
    Vector s(4);
    s << 3, 2, 1, 0.5;
    const double total = s.squaredNorm();
    for (double t : {0.1, 0.5, 0.9, 0.95, 0.99, 1.0}) {
        const auto k = truncation_rank(s, t);
        CHECK(s.head(static_cast<Eigen::Index>(k)).squaredNorm() >= t * total * (1 - 1e-12));
        if (k > 1) {
            CHECK(s.head(static_cast<Eigen::Index>(k - 1)).squaredNorm() < t * total);
        }
    }
}

TEST_CASE("self-projection identity and reconstruction")
{
    const Matrix raw = random_matrix(20, 8, 9, -3, 7);
    const auto fm = FeatureMatrix::dense(ids(SetLabel::Generated, 20), cols(8), raw);
    const auto sc = minmax_fit(fm, "GENERATED");
    const Matrix scaled = minmax_apply(fm, sc);
    CHECK(scaled.minCoeff() >= 0.0);
    CHECK(scaled.maxCoeff() <= 1.0);
    const auto m = svd_fit(scaled, sc, 1.0);
    const Matrix coords = project(fm, m);
    Eigen::JacobiSVD<Matrix> ref(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto k = static_cast<Eigen::Index>(m.k);
    // Same subspace, signs fixed per column: compare |U*S| column-wise.
    for (Eigen::Index c = 0; c < k; ++c) {
        const Vector us = ref.matrixU().col(c) * ref.singularValues()[c];
        const double sign = us.dot(coords.col(c)) >= 0 ? 1.0 : -1.0;
        CHECK((coords.col(c) - sign * us).norm() < 1e-8);
    }
    CHECK((coords * m.basis.transpose() - scaled).norm() < 1e-8);
}

TEST_CASE("run_projection modes")
{
    const auto coco = FeatureMatrix::dense(ids(SetLabel::Coco, 24), cols(10), random_matrix(24, 10, 1));
    const auto gen = FeatureMatrix::dense(ids(SetLabel::Generated, 40), cols(10), random_matrix(40, 10, 2, -1, 2));
    for (auto mode : kAllModes) {
        const auto p = run_projection(mode, coco, gen, 0.95);
        CHECK(p.rows.size() == 64);
        CHECK(p.rows.front().set == SetLabel::Coco);
        CHECK(p.rows.back().set == SetLabel::Generated);
        CHECK(p.coordinates.rows() == 64);
        CHECK(p.coordinates.cols() == static_cast<Eigen::Index>(p.model.k));
        CHECK(p.coordinates.allFinite());
        if (mode == ProjectionMode::GeneratedIntoCoco) {
            CHECK(p.model.k <= 24);
            CHECK(p.model.owner == "COCO");
        }
        check_model(p.model, Matrix());
        CHECK(parse_mode(to_string(mode)) == mode);
    }
    CHECK_THROWS_AS(parse_mode("sideways"), ValidationError);

    // Identical sets in joint mode give identical coordinates for matching rows.
    const auto twin = FeatureMatrix::dense(ids(SetLabel::Generated, 24), cols(10), random_matrix(24, 10, 1));
    const auto j = run_projection(ProjectionMode::Joint, coco, twin, 0.95);
    CHECK((j.coordinates.topRows(24) - j.coordinates.bottomRows(24)).norm() == 0.0);
}

TEST_CASE("identical rows project identically")
{
    Matrix raw = random_matrix(10, 5, 3);
    raw.row(7) = raw.row(2);
    const auto fm = FeatureMatrix::dense(ids(SetLabel::Coco, 10), cols(5), raw);
    const auto sc = minmax_fit(fm, "COCO");
    const auto m = svd_fit(minmax_apply(fm, sc), sc, 0.95);
    const Matrix c = project(fm, m);
    CHECK(c.row(7) == c.row(2));
}

TEST_CASE("model json round trip")
{
    const auto fm = FeatureMatrix::dense(ids(SetLabel::Coco, 6), cols(4), random_matrix(6, 4, 8));
    const auto sc = minmax_fit(fm, "COCO");
    const auto m = svd_fit(minmax_apply(fm, sc), sc, 0.9);
    const auto back = model_from_json(model_to_json(m));
    CHECK(back.basis == m.basis);
    CHECK(back.k == m.k);
    CHECK(back.scaling.min == m.scaling.min);
    CHECK(model_to_json(back).dump() == model_to_json(m).dump());
}
