#include "cocoela/sampling.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cocoela/rng.hpp"

namespace cocoela::sampling {

RowMatrix build_design(const SamplePlan& plan, const BoxBounds& bounds)
{
    const std::size_t d = bounds.dimension();
    if (plan.n < d + 2) {
        throw ValidationError("sample size " + std::to_string(plan.n) + " too small for dimension " +
                              std::to_string(d) + " (need n >= D + 2)");
    }
    Rng rng(plan.seed);
    RowMatrix x(plan.n, d);
    if (plan.strategy == Strategy::Uniform) {
        for (std::size_t i = 0; i < plan.n; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                x(i, j) = rng.uniform();
            }
        }
    } else {
        std::vector<std::size_t> perm(plan.n);
        const double width = 1.0 / static_cast<double>(plan.n);
        for (std::size_t j = 0; j < d; ++j) {
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            for (std::size_t k = plan.n; k > 1; --k) {
                std::swap(perm[k - 1], perm[rng.below(k)]);
            }
            for (std::size_t i = 0; i < plan.n; ++i) {
                // Clamp guards the top stratum against rounding up to 1.
                x(i, j) = std::min((static_cast<double>(perm[i]) + rng.uniform()) * width,
                                   std::nextafter(static_cast<double>(perm[i] + 1) * width, 0.0));
            }
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double lo = bounds.lower()[j];
        const double span = bounds.upper()[j] - lo;
        for (std::size_t i = 0; i < plan.n; ++i) {
            x(i, j) = lo + span * x(i, j);
        }
    }
    return x;
}

SampleSet evaluate_design(const Problem& problem, const RowMatrix& x, int threads)
{
    if (static_cast<std::size_t>(x.cols()) != problem.dimension()) {
        throw ValidationError("design has " + std::to_string(x.cols()) + " columns but " + to_string(problem.id()) +
                              " has dimension " + std::to_string(problem.dimension()));
    }
    SampleSet s{problem.id(), x, Vector(x.rows())};
    const auto n = static_cast<std::int64_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1))
    for (std::int64_t i = 0; i < n; ++i) {
        s.y[i] = evaluate(problem, {x.row(i).data(), d});
    }
    for (Eigen::Index i = 0; i < s.y.size(); ++i) {
        if (!std::isfinite(s.y[i])) {
            throw InternalError("non-finite objective value for " + to_string(problem.id()) + " at sample row " +
                                std::to_string(i));
        }
    }
    return s;
}

void validate(const SampleSet& s)
{
    if (s.x.rows() != s.y.size()) {
        throw ValidationError("sample for " + to_string(s.problem_id) + " has mismatched X/y lengths");
    }
    if (s.x.rows() == 0 || s.x.cols() == 0) {
        throw ValidationError("sample for " + to_string(s.problem_id) + " is empty");
    }
    if (!s.x.allFinite() || !s.y.allFinite()) {
        throw ValidationError("sample for " + to_string(s.problem_id) + " holds non-finite values");
    }
}

void write_csv(std::ostream& out, const SampleSet& s)
{
    const auto d = s.x.cols();
    for (Eigen::Index j = 0; j < d; ++j) {
        out << 'x' << (j + 1) << ',';
    }
    out << "y\n";
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            out << format_double(s.x(i, j)) << ',';
        }
        out << format_double(s.y[i]) << '\n';
    }
}

namespace {

double parse_double(std::string_view text)
{
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ValidationError("cannot parse number '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

}  // namespace

SampleSet read_csv(std::istream& in, ProblemId id)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("sample CSV for " + to_string(id) + " is empty");
    }
    const auto header = split(line);
    if (header.size() < 2 || header.back() != "y") {
        throw ValidationError("sample CSV for " + to_string(id) + " has a malformed header");
    }
    const std::size_t d = header.size() - 1;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != d + 1) {
            throw ValidationError("sample CSV for " + to_string(id) + " row " + std::to_string(rows + 1) +
                                  " has " + std::to_string(cells.size()) + " cells");
        }
        for (auto c : cells) {
            values.push_back(parse_double(c));
        }
        ++rows;
    }
    SampleSet s{id, RowMatrix(rows, d), Vector(rows)};
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            s.x(i, j) = values[i * (d + 1) + j];
        }
        s.y[i] = values[i * (d + 1) + d];
    }
    validate(s);
    return s;
}

std::string file_name(const ProblemId& id)
{
    std::string set(to_string(id.set));
    std::transform(set.begin(), set.end(), set.begin(), [](unsigned char c) { return std::tolower(c); });
    return set + "_" + std::to_string(id.index) + ".csv";
}

}  // namespace cocoela::sampling
