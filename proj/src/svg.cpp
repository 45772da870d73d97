#include "cocoela/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace cocoela::svg {

namespace {

constexpr double kSize = 640.0;
constexpr double kMargin = 40.0;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    std::string s(buf);
    return s == "-0.000" ? "0.000" : s;
}

std::string escape(const std::string& text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

void header(std::ostringstream& os, const std::string& title)
{
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
       << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << kSize << "\" height=\"" << kSize << "\" fill=\"white\"/>\n";
    if (!title.empty()) {
        os << "<text x=\"" << num(kSize / 2) << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           << "font-size=\"14\">" << escape(title) << "</text>\n";
    }
}

void legend(std::ostringstream& os)
{
    os << "<rect x=\"12\" y=\"" << num(kSize - 34) << "\" width=\"10\" height=\"10\" fill=\"black\"/>\n"
       << "<text x=\"26\" y=\"" << num(kSize - 25) << "\" font-family=\"sans-serif\" font-size=\"11\">generated</text>\n"
       << "<rect x=\"12\" y=\"" << num(kSize - 20) << "\" width=\"10\" height=\"10\" fill=\"red\"/>\n"
       << "<text x=\"26\" y=\"" << num(kSize - 11) << "\" font-family=\"sans-serif\" font-size=\"11\">COCO</text>\n";
}

const char* fill_for(SetLabel set)
{
    return set == SetLabel::Coco ? "red" : "black";
}

}  // namespace

std::string plot_embedding(const analysis::Embedding2D& e, const std::string& title)
{
    if (e.rows.empty() || e.coords.rows() == 0) {
        throw ValidationError("cannot plot an empty embedding");
    }
    const double xmin = e.coords.col(0).minCoeff();
    const double xmax = e.coords.col(0).maxCoeff();
    const double ymin = e.coords.col(1).minCoeff();
    const double ymax = e.coords.col(1).maxCoeff();
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
    const double scale = (kSize - 2 * kMargin) / span;
    const double cx = 0.5 * (xmin + xmax);
    const double cy = 0.5 * (ymin + ymax);

    std::ostringstream os;
    header(os, title);
    // Generated first so the smaller COCO set stays visible on top.
    for (SetLabel pass : {SetLabel::Generated, SetLabel::Coco}) {
        for (std::size_t i = 0; i < e.rows.size(); ++i) {
            if (e.rows[i].set != pass) {
                continue;
            }
            const auto r = static_cast<Eigen::Index>(i);
            const double px = kSize / 2 + (e.coords(r, 0) - cx) * scale;
            const double py = kSize / 2 - (e.coords(r, 1) - cy) * scale;
            os << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"3\" fill=\"" << fill_for(pass)
               << "\"><title>" << to_string(e.rows[i]) << "</title></circle>\n";
        }
    }
    legend(os);
    os << "</svg>\n";
    return os.str();
}

std::string plot_graph(const analysis::CorrelationGraph& g, const std::string& title)
{
    if (g.nodes.empty()) {
        throw ValidationError("cannot plot an empty graph");
    }
    std::vector<std::size_t> coco;
    std::vector<std::size_t> gen;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        (g.nodes[i].set == SetLabel::Coco ? coco : gen).push_back(i);
    }
    const double radius = kSize / 2 - kMargin;
    std::vector<std::pair<double, double>> pos(g.nodes.size());
    const auto place = [&](const std::vector<std::size_t>& members, double from_deg, double to_deg) {
        for (std::size_t k = 0; k < members.size(); ++k) {
            const double t = members.size() == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(members.size() - 1);
            const double a = (from_deg + t * (to_deg - from_deg)) * std::numbers::pi / 180.0;
            pos[members[k]] = {kSize / 2 + radius * std::cos(a), kSize / 2 - radius * std::sin(a)};
        }
    };
    place(coco, 100.0, 260.0);
    place(gen, 80.0, -80.0);

    std::ostringstream os;
    header(os, title);
    os << "<g stroke-opacity=\"0.35\">\n";
    for (const auto& e : g.edges) {
        os << "<line x1=\"" << num(pos[e.i].first) << "\" y1=\"" << num(pos[e.i].second) << "\" x2=\""
           << num(pos[e.j].first) << "\" y2=\"" << num(pos[e.j].second) << "\" stroke=\""
           << (e.r >= 0 ? "blue" : "red") << "\" stroke-width=\"" << num(2.0 * std::abs(e.r)) << "\"/>\n";
    }
    os << "</g>\n";
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        os << "<circle cx=\"" << num(pos[i].first) << "\" cy=\"" << num(pos[i].second) << "\" r=\"3\" fill=\""
           << fill_for(g.nodes[i].set) << "\"><title>" << to_string(g.nodes[i]) << "</title></circle>\n";
    }
    legend(os);
    os << "</svg>\n";
    return os.str();
}

}  // namespace cocoela::svg
