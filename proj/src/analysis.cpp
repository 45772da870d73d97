#include "cocoela/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cocoela/rng.hpp"

namespace cocoela::analysis {

namespace {

constexpr std::uint64_t kTagTsneInit = 31;

Matrix squared_distances(const Matrix& x)
{
    const auto n = x.rows();
    Matrix d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (x.row(i) - x.row(j)).squaredNorm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

/// Entropy in bits of row i at precision beta; fills `row` with the
/// normalized conditional distribution.
double row_entropy(const Matrix& sq, Eigen::Index i, double beta, double dmin, Eigen::RowVectorXd& row)
{
    const auto n = sq.cols();
    double sum = 0.0;
    double weighted = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) {
            row[j] = 0.0;
            continue;
        }
        const double shifted = sq(i, j) - dmin;
        const double p = std::exp(-beta * shifted);
        row[j] = p;
        sum += p;
        weighted += shifted * p;
    }
    row /= sum;
    return (std::log(sum) + beta * weighted / sum) / std::log(2.0);
}

}  // namespace

Affinities calibrate_affinities(const Matrix& sq, double perplexity)
{
    const auto n = sq.rows();
    const double target = std::log2(perplexity);
    Affinities out{Matrix::Zero(n, n), std::vector<double>(static_cast<std::size_t>(n), 1.0)};
    Eigen::RowVectorXd row(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double dmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) {
                dmin = std::min(dmin, sq(i, j));
            }
        }
        // Entropy falls monotonically in beta; bracket, then bisect.
        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        double beta = 1.0;
        double h = row_entropy(sq, i, beta, dmin, row);
        for (int iter = 0; iter < 500 && std::abs(h - target) > 1e-10; ++iter) {
            if (h > target) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (lo + hi);
            } else {
                hi = beta;
                beta = 0.5 * (lo + hi);
            }
            h = row_entropy(sq, i, beta, dmin, row);
        }
        out.conditional.row(i) = row;
        out.precision[static_cast<std::size_t>(i)] = beta;
    }
    return out;
}

Embedding2D tsne(const Matrix& coords, const std::vector<ProblemId>& rows, const TsneParams& params)
{
    const auto n = coords.rows();
    if (static_cast<std::size_t>(n) != rows.size()) {
        throw ValidationError("t-SNE row ids do not match coordinate rows");
    }
    if (n < 5) {
        throw ValidationError("t-SNE needs at least 5 points");
    }
    const double max_perplexity = static_cast<double>(n - 1) / 3.0;
    if (!(params.perplexity > 0 && params.perplexity < max_perplexity)) {
        throw ValidationError("perplexity " + format_double(params.perplexity) + " infeasible for " +
                              std::to_string(n) + " points; it must be below " + format_double(max_perplexity));
    }
    if (params.iterations < 1 || !(params.learning_rate > 0)) {
        throw ValidationError("t-SNE needs positive iterations and learning rate");
    }
    if (!coords.allFinite()) {
        throw ValidationError("t-SNE input holds non-finite values");
    }

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rows[a] < rows[b]; });
    if (std::adjacent_find(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return rows[a] == rows[b];
        }) != order.end()) {
        throw ValidationError("t-SNE row ids must be unique");
    }
    Matrix x(n, coords.cols());
    for (Eigen::Index c = 0; c < n; ++c) {
        x.row(c) = coords.row(static_cast<Eigen::Index>(order[static_cast<std::size_t>(c)]));
    }

    const Affinities aff = calibrate_affinities(squared_distances(x), params.perplexity);
    Matrix p = aff.conditional + aff.conditional.transpose();
    p /= p.sum();

    Matrix y(n, 2);
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto& id = rows[order[static_cast<std::size_t>(c)]];
        Rng rng = Rng::stream({params.seed, static_cast<std::uint64_t>(id.set), id.index, kTagTsneInit});
        y(c, 0) = 1e-4 * rng.normal();
        y(c, 1) = 1e-4 * rng.normal();
    }

    Matrix num(n, n);
    std::vector<double> row_sums(static_cast<std::size_t>(n));
    const auto nn = static_cast<std::int64_t>(n);
    const int threads = std::max(params.threads, 1);
    const auto compute_q = [&] {
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::int64_t ii = 0; ii < nn; ++ii) {
            const auto i = static_cast<Eigen::Index>(ii);
            double s = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) {
                    num(i, j) = 0.0;
                    continue;
                }
                const double dx = y(i, 0) - y(j, 0);
                const double dy = y(i, 1) - y(j, 1);
                num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
                s += num(i, j);
            }
            row_sums[static_cast<std::size_t>(ii)] = s;
        }
        return std::accumulate(row_sums.begin(), row_sums.end(), 0.0);
    };
    const auto kl = [&] {
        const double z = compute_q();
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i != j && p(i, j) > 0) {
                    const double q = std::max(num(i, j) / z, std::numeric_limits<double>::min());
                    total += p(i, j) * std::log(p(i, j) / q);
                }
            }
        }
        return std::max(total, 0.0);
    };

    Embedding2D out;
    out.rows = rows;
    out.params = params;
    out.initial_kl = kl();

    Matrix grad(n, 2);
    Matrix update = Matrix::Zero(n, 2);
    Matrix gains = Matrix::Ones(n, 2);
    for (int iter = 0; iter < params.iterations; ++iter) {
        const double exaggeration = iter < params.exaggeration_iters ? params.exaggeration_factor : 1.0;
        const double momentum = iter < params.momentum_switch_iter ? params.initial_momentum : params.final_momentum;
        const double z = compute_q();
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::int64_t ii = 0; ii < nn; ++ii) {
            const auto i = static_cast<Eigen::Index>(ii);
            double g0 = 0.0;
            double g1 = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                const double mult = (exaggeration * p(i, j) - num(i, j) / z) * num(i, j);
                g0 += mult * (y(i, 0) - y(j, 0));
                g1 += mult * (y(i, 1) - y(j, 1));
            }
            grad(i, 0) = 4.0 * g0;
            grad(i, 1) = 4.0 * g1;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index d = 0; d < 2; ++d) {
                const bool same_sign = (grad(i, d) > 0) == (update(i, d) > 0);
                gains(i, d) = same_sign ? gains(i, d) * 0.8 : gains(i, d) + 0.2;
                gains(i, d) = std::max(gains(i, d), 0.01);
                update(i, d) = momentum * update(i, d) - params.learning_rate * gains(i, d) * grad(i, d);
                y(i, d) += update(i, d);
            }
        }
        const Eigen::RowVector2d mean = y.colwise().mean();
        y.rowwise() -= mean;
    }
    out.final_kl = kl();

    out.coords.resize(n, 2);
    for (Eigen::Index c = 0; c < n; ++c) {
        out.coords.row(static_cast<Eigen::Index>(order[static_cast<std::size_t>(c)])) = y.row(c);
    }
    if (!out.coords.allFinite()) {
        throw InternalError("t-SNE diverged to non-finite coordinates");
    }
    return out;
}

CorrelationMatrix pearson_matrix(const Matrix& coords)
{
    const auto n = coords.rows();
    const auto k = coords.cols();
    if (k < 2) {
        throw ValidationError("Pearson correlation needs at least 2 components per problem");
    }
    CorrelationMatrix out{Matrix::Zero(n, n), std::vector<char>(static_cast<std::size_t>(n), 1), k < 3};
    Matrix centered = coords.colwise() - coords.rowwise().mean();
    Vector norms(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        norms[i] = centered.row(i).norm();
        if (!(norms[i] > 0)) {
            out.valid[static_cast<std::size_t>(i)] = 0;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!out.valid[static_cast<std::size_t>(i)]) {
            continue;
        }
        out.values(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (!out.valid[static_cast<std::size_t>(j)]) {
                continue;
            }
            const double r = std::clamp(centered.row(i).dot(centered.row(j)) / (norms[i] * norms[j]), -1.0, 1.0);
            out.values(i, j) = r;
            out.values(j, i) = r;
        }
    }
    return out;
}

CorrelationGraph build_graph(const CorrelationMatrix& matrix, const std::vector<ProblemId>& nodes, double threshold)
{
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ValidationError("correlation threshold must lie in [0, 1]");
    }
    const auto n = matrix.values.rows();
    if (static_cast<std::size_t>(n) != nodes.size() || matrix.values.cols() != n) {
        throw ValidationError("correlation matrix and node list disagree in size");
    }
    CorrelationGraph g{nodes, {}, threshold};
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!matrix.valid[static_cast<std::size_t>(i)]) {
            continue;
        }
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (!matrix.valid[static_cast<std::size_t>(j)]) {
                continue;
            }
            const double r = matrix.values(i, j);
            if (std::abs(r) >= threshold) {
                g.edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), r});
            }
        }
    }
    return g;
}

SeparationReport silhouette(const Matrix& coords, const std::vector<ProblemId>& rows, std::string mode)
{
    const auto n = coords.rows();
    if (static_cast<std::size_t>(n) != rows.size()) {
        throw ValidationError("silhouette row ids do not match coordinate rows");
    }
    SeparationReport rep;
    rep.mode = std::move(mode);
    for (const auto& id : rows) {
        (id.set == SetLabel::Coco ? rep.coco_count : rep.generated_count) += 1;
    }
    if (rep.coco_count < 2 || rep.generated_count < 2) {
        throw ValidationError("silhouette needs at least 2 members in each set");
    }
    double total = 0.0;
    double coco_total = 0.0;
    double gen_total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double same = 0.0;
        double other = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const double d = (coords.row(i) - coords.row(j)).norm();
            (rows[static_cast<std::size_t>(j)].set == rows[static_cast<std::size_t>(i)].set ? same : other) += d;
        }
        const bool coco = rows[static_cast<std::size_t>(i)].set == SetLabel::Coco;
        const double own_n = static_cast<double>(coco ? rep.coco_count : rep.generated_count);
        const double other_n = static_cast<double>(coco ? rep.generated_count : rep.coco_count);
        const double a = same / (own_n - 1.0);
        const double b = other / other_n;
        const double denom = std::max(a, b);
        const double s = denom > 0 ? (b - a) / denom : 0.0;
        total += s;
        (coco ? coco_total : gen_total) += s;
    }
    rep.silhouette = total / static_cast<double>(n);
    rep.coco_mean = coco_total / static_cast<double>(rep.coco_count);
    rep.generated_mean = gen_total / static_cast<double>(rep.generated_count);
    return rep;
}

nlohmann::json report_to_json(const SeparationReport& r)
{
    return {{"mode", r.mode},
            {"silhouette", r.silhouette},
            {"coco_mean_silhouette", r.coco_mean},
            {"generated_mean_silhouette", r.generated_mean},
            {"coco_count", r.coco_count},
            {"generated_count", r.generated_count},
            {"coco_mean_positive", r.coco_mean > 0}};
}

}  // namespace cocoela::analysis
