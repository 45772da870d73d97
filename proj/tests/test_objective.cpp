#include <doctest.h>

#include <cmath>
#include <vector>

#include "cocoela/bbob.hpp"
#include "cocoela/problem.hpp"
#include "cocoela/rng.hpp"

using namespace cocoela;

TEST_CASE("sphere identity instance values")
{
    const auto p = make_bbob(1, 2, 0);
    CHECK(evaluate(p, std::vector<double>{0, 0}) == 0.0);
    CHECK(evaluate(p, std::vector<double>{3, 4}) == doctest::Approx(25.0).epsilon(1e-15));
    const auto p10 = make_bbob(1, 10, 0);
    CHECK(p10.bbob().f_opt() == 0.0);
    for (double v : p10.bbob().shift()) {
        CHECK(v == 0.0);
    }
    CHECK(p10.bbob().rotation_r().isIdentity(0.0));
}

TEST_CASE("rastrigin identity optimum at origin")
{
    const auto p = make_bbob(3, 2, 0);
    CHECK(std::abs(evaluate(p, std::vector<double>{0, 0})) < 1e-12);
}

TEST_CASE("rosenbrock optimum identity")
{
    const auto p = make_bbob(8, 5, 0);
    const auto& b = p.bbob();
    CHECK(std::abs(b(b.shift()) - b.f_opt()) < 1e-9);
}

TEST_CASE("different instance seeds move the optimum")
{
    const auto a = make_bbob(3, 2, 7);
    const auto b = make_bbob(3, 2, 8);
    CHECK(a.bbob().shift() != b.bbob().shift());
}

TEST_CASE("dimension mismatch names both dimensions")
{
    const auto p = make_bbob(1, 3, 0);
    try {
        evaluate(p, std::vector<double>{1, 2});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find('3') != std::string::npos);
        CHECK(msg.find('2') != std::string::npos);
    }
}

TEST_CASE("function id out of range lists the valid range")
{
    for (int bad : {0, 25, -1}) {
        try {
            make_bbob(bad, 2, 0);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("1..24") != std::string::npos);
        }
    }
    CHECK_THROWS_AS(make_bbob(1, 1, 0), ValidationError);
}

TEST_CASE("suite shape and determinism")
{
    const auto s = bbob_suite(10, 0);
    REQUIRE(s.size() == 24);
    for (std::size_t i = 0; i < 24; ++i) {
        CHECK(s[i].bbob().function_id() == static_cast<int>(i + 1));
        CHECK(s[i].id().set == SetLabel::Coco);
        CHECK(s[i].id().index == i + 1);
        for (std::size_t k = 0; k < 10; ++k) {
            CHECK(s[i].bounds().lower()[k] == -5.0);
            CHECK(s[i].bounds().upper()[k] == 5.0);
        }
        const auto& b = s[i].bbob();
        CHECK(std::abs(b(b.shift()) - b.f_opt()) < 1e-9);
    }
    const auto a = bbob_suite(5, 1);
    const auto b = bbob_suite(5, 1);
    for (std::size_t i = 0; i < 24; ++i) {
        CHECK(a[i].bbob() == b[i].bbob());
    }
}

TEST_CASE("instance invariants over seeds")
{
    for (std::uint64_t seed : {1u, 2u, 3u, 17u}) {
        for (int f = 1; f <= 24; ++f) {
            const bbob::BbobInstance inst(f, 5, seed);
            for (const Matrix* m : {&inst.rotation_r(), &inst.rotation_q()}) {
                const Matrix e = m->transpose() * *m - Matrix::Identity(5, 5);
                CHECK(e.cwiseAbs().maxCoeff() < 1e-10);
            }
            CHECK(std::abs(inst.f_opt()) <= 1000.0);
            if (f != 5) {
                // f5's optimum sits on the domain corner by definition.
                for (double v : inst.shift()) {
                    CHECK(std::abs(v) <= 4.0 + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("evaluation is bit-identical across repeats")
{
    Rng rng(9);
    for (int f = 1; f <= 24; ++f) {
        const auto p = make_bbob(f, 4, 3);
        const auto q = make_bbob(f, 4, 3);
        std::vector<double> x(4);
        for (auto& v : x) {
            v = rng.uniform(-5, 5);
        }
        CHECK(evaluate(p, x) == evaluate(q, x));
    }
}

TEST_CASE("metadata round trip")
{
    for (int f : {1, 7, 21, 24}) {
        const auto p = make_bbob(f, 3, 2);
        const auto q = bbob_from_metadata(bbob_metadata(p));
        CHECK(q.bbob() == p.bbob());
        CHECK(q.id() == p.id());
    }
}

TEST_CASE("transform helpers")
{
    CHECK(bbob::t_osz(0.0) == 0.0);
    CHECK(bbob::t_osz(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    const Vector l = bbob::lambda(10.0, 3);
    CHECK(l[0] == doctest::Approx(1.0));
    CHECK(l[2] == doctest::Approx(std::sqrt(10.0)));
    CHECK(bbob::f_pen(Vector::Constant(2, 6.0)) == doctest::Approx(2.0));
    Vector v(3);
    v << -1.0, 0.5, 2.0;
    bbob::t_asy(v, 0.2);
    CHECK(v[0] == -1.0);
    CHECK(v[1] == doctest::Approx(std::pow(0.5, 1.0 + 0.2 * 0.5 * std::sqrt(0.5))).epsilon(1e-14));
    CHECK(v[2] == doctest::Approx(std::pow(2.0, 1.0 + 0.2 * std::sqrt(2.0))).epsilon(1e-14));
}

TEST_CASE("rng streams")
{
    CHECK(derive_seed({1, 2}) != derive_seed({2, 1}));
    Rng a = Rng::stream({5, 6});
    Rng b = Rng::stream({5, 6});
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 7000; ++i) {
        ++hist[a.below(7)];
    }
    for (int h : hist) {
        CHECK(h > 800);
    }
}

TEST_CASE("box bounds and ids")
{
    CHECK_THROWS_AS(BoxBounds({1.0}, {1.0}), ValidationError);
    CHECK_THROWS_AS(BoxBounds({0.0, 0.0}, {1.0}), ValidationError);
    const auto b = BoxBounds::cube(2, -5, 5);
    CHECK(b.contains(std::vector<double>{5, -5}));
    CHECK_FALSE(b.contains(std::vector<double>{5.1, 0}));
    CHECK(to_string(ProblemId{SetLabel::Generated, 3}) == "GENERATED_3");
    CHECK(parse_set_label("COCO") == SetLabel::Coco);
    CHECK_THROWS_AS(parse_set_label("x"), ValidationError);
}
