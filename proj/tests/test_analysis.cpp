#include <doctest.h>

#include <cmath>

#include "cocoela/analysis.hpp"
#include "cocoela/rng.hpp"
#include "oracles.hpp"

using namespace cocoela;
using namespace cocoela::analysis;

namespace {

Matrix gaussian(std::size_t r, std::size_t c, std::uint64_t seed, double shift = 0.0)
{
    Rng rng(seed);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = rng.normal() + shift;
        }
    }
    return m;
}

std::vector<ProblemId> mixed_ids(std::size_t coco, std::size_t gen)
{
    std::vector<ProblemId> v;
    for (std::size_t i = 0; i < coco; ++i) {
        v.push_back({SetLabel::Coco, i + 1});
    }
    for (std::size_t i = 0; i < gen; ++i) {
        v.push_back({SetLabel::Generated, i});
    }
    return v;
}

Matrix squared_distances(const Matrix& x)
{
    Matrix d(x.rows(), x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.rows(); ++j) {
            d(i, j) = (x.row(i) - x.row(j)).squaredNorm();
        }
    }
    return d;
}

double row_entropy_bits(const Matrix& p, Eigen::Index i)
{
    double h = 0;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        if (p(i, j) > 0) {
            h -= p(i, j) * std::log2(p(i, j));
        }
    }
    return h;
}

TsneParams short_params()
{
    TsneParams p;
    p.perplexity = 5;
    p.iterations = 300;
    p.exaggeration_iters = 100;
    p.momentum_switch_iter = 100;
    return p;
}

}  // namespace

TEST_CASE("affinity calibration hits the target entropy")
{
    const Matrix x = gaussian(60, 4, 1);
    const auto a = calibrate_affinities(squared_distances(x), 10.0);
    for (Eigen::Index i = 0; i < 60; ++i) {
        CHECK(std::abs(row_entropy_bits(a.conditional, i) - std::log2(10.0)) <= kEntropyTolerance);
        CHECK(a.conditional(i, i) == 0.0);
        CHECK(a.conditional.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("tsne shape, determinism and KL decrease")
{
    const Matrix x = gaussian(30, 3, 2);
    const auto ids = mixed_ids(10, 20);
    const auto a = tsne(x, ids, short_params());
    CHECK(a.coords.rows() == 30);
    CHECK(a.coords.cols() == 2);
    CHECK(a.coords.allFinite());
    CHECK(a.final_kl >= 0.0);
    CHECK(a.final_kl < a.initial_kl);
    CHECK(a.rows == ids);
    const auto b = tsne(x, ids, short_params());
    CHECK(a.coords == b.coords);
    auto threaded = short_params();
    threaded.threads = 3;
    CHECK(tsne(x, ids, threaded).coords == a.coords);
}

TEST_CASE("tsne is equivariant to row permutation")
{
    const Matrix x = gaussian(20, 3, 4);
    const auto ids = mixed_ids(8, 12);
    const auto a = tsne(x, ids, short_params());
    Matrix xr = x.colwise().reverse();
    std::vector<ProblemId> ir(ids.rbegin(), ids.rend());
    const auto b = tsne(xr, ir, short_params());
    for (Eigen::Index i = 0; i < 20; ++i) {
        CHECK(b.coords.row(i) == a.coords.row(19 - i));
    }
}

TEST_CASE("tsne rejects infeasible perplexity")
{
    const Matrix x = gaussian(10, 2, 1);
    auto p = short_params();
    p.perplexity = 30;
    try {
        tsne(x, mixed_ids(5, 5), p);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find('3') != std::string::npos);
    }
    CHECK_THROWS_AS(tsne(gaussian(4, 2, 1), mixed_ids(2, 2), short_params()), ValidationError);
}

TEST_CASE("pearson examples")
{
    Matrix v(4, 4);
    v << 1, 2, 3, 4,
         2, 4, 6, 8,
         -1, -2, -3, -4,
         5, 5, 5, 5;
    const auto c = pearson_matrix(v);
    CHECK(c.values(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.values(0, 2) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(c.values(0, 0) == 1.0);
    CHECK_FALSE(c.valid[3]);
    CHECK(c.valid[0]);
    CHECK_FALSE(c.low_dimension);
    CHECK(pearson_matrix(Matrix::Random(3, 2)).low_dimension);
    CHECK_THROWS_AS(pearson_matrix(Matrix::Random(3, 1)), ValidationError);
}

TEST_CASE("pearson matches direct formula")
{
    const Matrix v = gaussian(5, 4, 11);
    const auto c = pearson_matrix(v);
    for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index j = 0; j < 5; ++j) {
            std::vector<double> a(v.row(i).data(), v.row(i).data() + 0);
            std::vector<double> b;
            for (Eigen::Index k = 0; k < 4; ++k) {
                a.push_back(v(i, k));
                b.push_back(v(j, k));
            }
            CHECK(std::abs(c.values(i, j) - *oracle::pearson(a, b)) <= 1e-12);
        }
    }
}

TEST_CASE("build_graph")
{
    const Matrix v = gaussian(8, 5, 3);
    const auto c = pearson_matrix(v);
    const auto ids = mixed_ids(3, 5);
    CHECK(build_graph(c, ids, 0.0).edges.size() == 28);
    const auto g = build_graph(c, ids, 0.5);
    std::vector<Edge> want;
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = i + 1; j < 8; ++j) {
            const double r = c.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (std::abs(r) >= 0.5) {
                want.push_back({i, j, r});
            }
        }
    }
    CHECK(g.edges == want);

    CorrelationMatrix exact{Matrix::Identity(3, 3), {1, 1, 1}, false};
    exact.values(0, 1) = exact.values(1, 0) = 1.0;
    exact.values(0, 2) = exact.values(2, 0) = 0.999999;
    exact.values(1, 2) = exact.values(2, 1) = -0.3;
    const auto one = build_graph(exact, mixed_ids(1, 2), 1.0);
    REQUIRE(one.edges.size() == 1);
    CHECK(one.edges[0].i == 0);
    CHECK(one.edges[0].j == 1);
    CHECK_THROWS_AS(build_graph(c, ids, 1.5), ValidationError);
    CHECK_THROWS_AS(build_graph(c, ids, -0.1), ValidationError);
}

TEST_CASE("silhouette")
{
    Matrix two(20, 2);
    two.topRows(10) = gaussian(10, 2, 1) * 0.1;
    two.bottomRows(10) = gaussian(10, 2, 2) * 0.1;
    two.bottomRows(10).array() += 50.0;
    const auto ids = mixed_ids(10, 10);
    const auto rep = silhouette(two, ids, "joint");
    CHECK(rep.silhouette > 0.5);
    CHECK(rep.mode == "joint");
    CHECK(rep.coco_count == 10);

    // Rotation and uniform scaling leave it unchanged.
    Eigen::Matrix2d rot;
    rot << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
    const Matrix turned = two * rot.transpose() * 3.0;
    CHECK(silhouette(turned, ids).silhouette == doctest::Approx(rep.silhouette).epsilon(1e-12));

    const Matrix blob = gaussian(400, 3, 7);
    std::vector<ProblemId> rnd;
    Rng rng(3);
    std::size_t c = 0, g = 0;
    for (int i = 0; i < 400; ++i) {
        rnd.push_back(rng.below(2) ? ProblemId{SetLabel::Coco, ++c} : ProblemId{SetLabel::Generated, g++});
    }
    const auto noise = silhouette(blob, rnd);
    CHECK(std::abs(noise.silhouette) <= 0.15);
    CHECK(noise.silhouette >= -1.0);

    CHECK_THROWS_AS(silhouette(gaussian(5, 2, 1), mixed_ids(1, 4)), ValidationError);
    const auto j = report_to_json(rep);
    CHECK(j["coco_mean_positive"] == (rep.coco_mean > 0));
}
