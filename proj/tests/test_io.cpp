#include <doctest.h>

#include <regex>
#include <set>

#include "cocoela/io.hpp"
#include "cocoela/svg.hpp"

using namespace cocoela;

namespace {

std::size_t count(const std::string& text, const std::string& needle)
{
    std::size_t n = 0;
    for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) {
        ++n;
    }
    return n;
}

analysis::Embedding2D embedding(std::size_t coco, std::size_t gen)
{
    analysis::Embedding2D e;
    for (std::size_t i = 0; i < coco; ++i) {
        e.rows.push_back({SetLabel::Coco, i + 1});
    }
    for (std::size_t i = 0; i < gen; ++i) {
        e.rows.push_back({SetLabel::Generated, i});
    }
    e.coords = Matrix::Random(static_cast<Eigen::Index>(coco + gen), 2);
    return e;
}

}  // namespace

TEST_CASE("sha256")
{
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("feature matrix csv round trip with NA")
{
    auto m = subspace::FeatureMatrix::dense({{SetLabel::Coco, 1}, {SetLabel::Generated, 0}}, {"a", "b"},
                                            Matrix::Random(2, 2));
    m.set(1, 0, std::nullopt);
    const auto text = io::feature_matrix_to_csv(m);
    CHECK(text.rfind("set_label,index,a,b\n", 0) == 0);
    CHECK(text.find("GENERATED,0,NA,") != std::string::npos);
    const auto back = io::feature_matrix_from_csv(text);
    CHECK(back.rows() == m.rows());
    CHECK_FALSE(back.at(1, 0));
    CHECK(*back.at(0, 1) == *m.at(0, 1));
    CHECK(io::feature_matrix_to_csv(back) == text);
}

TEST_CASE("coordinates csv round trip")
{
    const std::vector<ProblemId> rows = {{SetLabel::Coco, 2}, {SetLabel::Generated, 5}};
    const Matrix c = Matrix::Random(2, 3);
    const auto text = io::coordinates_to_csv(rows, c);
    CHECK(text.rfind("set_label,index,c1,c2,c3\n", 0) == 0);
    const auto back = io::coordinates_from_csv(text);
    CHECK(back.rows == rows);
    CHECK(back.values == c);
    CHECK_THROWS_AS(io::coordinates_from_csv("set_label,index,c1\nCOCO,x,1\n"), ValidationError);
}

TEST_CASE("embedding svg")
{
    const auto e = embedding(24, 100);
    const auto svg = svg::plot_embedding(e, "t");
    CHECK(count(svg, "<circle") == 124);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    const std::regex fill(R"re(<circle[^>]*fill="([^"]+)")re");
    std::set<std::string> colors;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), fill); it != std::sregex_iterator(); ++it) {
        colors.insert((*it)[1]);
    }
    CHECK(colors.size() == 2);
    CHECK(svg == svg::plot_embedding(e, "t"));
    CHECK_THROWS_AS(svg::plot_embedding(embedding(0, 0)), ValidationError);
}

TEST_CASE("graph svg")
{
    analysis::CorrelationGraph g;
    g.nodes = {{SetLabel::Coco, 1}, {SetLabel::Coco, 2}, {SetLabel::Generated, 0}};
    const auto empty = svg::plot_graph(g);
    CHECK(count(empty, "<line") == 0);
    CHECK(count(empty, "<circle") == 3);
    g.edges = {{0, 2, 0.97}, {1, 2, -0.99}};
    const auto two = svg::plot_graph(g);
    CHECK(count(two, "<line") == 2);
    CHECK(two.find("blue") != std::string::npos);
    CHECK(two == svg::plot_graph(g));
}

TEST_CASE("correlation csv")
{
    analysis::CorrelationMatrix m;
    m.values = Matrix::Identity(2, 2);
    m.valid = {1, 0};
    const auto text = io::correlation_matrix_to_csv(m, {{SetLabel::Coco, 1}, {SetLabel::Generated, 0}});
    CHECK(text.rfind("problem,COCO_1,GENERATED_0\n", 0) == 0);
    CHECK(text.find("NA") != std::string::npos);
    analysis::CorrelationGraph g;
    g.edges = {{0, 1, -0.5}};
    CHECK(io::edges_to_csv(g) == "i,j,r\n0,1,-0.5\n");
}
