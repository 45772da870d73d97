#include "cocoela/ela.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "cocoela/rng.hpp"

namespace cocoela::ela {

using sampling::SampleSet;

namespace {

constexpr std::array<int, 4> kDispPercents = {2, 5, 10, 25};
constexpr double kPcaVarianceShare = 0.9;
constexpr double kIcEntropyThreshold = 0.05;
constexpr std::uint64_t kTagTourStart = 21;

Feature invalid(std::string name)
{
    return Feature{std::move(name), std::nullopt};
}

Feature valid(std::string name, double v)
{
    if (!std::isfinite(v)) {
        return invalid(std::move(name));
    }
    return Feature{std::move(name), v};
}

std::vector<Feature> all_invalid(const std::vector<std::string>& names)
{
    std::vector<Feature> out;
    for (const auto& n : names) {
        out.push_back(invalid(n));
    }
    return out;
}

bool all_equal(const Vector& y)
{
    return y.size() == 0 || y.maxCoeff() == y.minCoeff();
}

double mean_of(const std::vector<double>& v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v)
{
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Pearson correlation; nullopt when either side has zero spread.
std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b)
{
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        return std::nullopt;
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double median_in_place(std::vector<double>& v)
{
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) {
        return hi;
    }
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

/// Quantile, R type 7.
double quantile_sorted(const std::vector<double>& sorted, double p)
{
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Row indices ordered by (y, row).
std::vector<std::size_t> order_by_y(const Vector& y)
{
    std::vector<std::size_t> idx(static_cast<std::size_t>(y.size()));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    return idx;
}

/// Kernel density peaks with at least 1% of the mass. The grid is cut at
/// interior local minima; each piece holds one mode.
int count_density_peaks(const Vector& y)
{
    constexpr int kGrid = 512;
    const auto n = static_cast<std::size_t>(y.size());
    std::vector<double> sorted(y.data(), y.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double sd = sample_sd(sorted);
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double lo = std::min(sd, iqr / 1.34);
    if (lo == 0.0) {
        lo = sd > 0 ? sd : (sorted[0] != 0.0 ? std::abs(sorted[0]) : 1.0);
    }
    const double bw = 0.9 * lo * std::pow(static_cast<double>(n), -0.2);

    const double ymin = sorted.front();
    const double ymax = sorted.back();
    const double step = (ymax - ymin) / (kGrid - 1);
    std::vector<double> dens(kGrid, 0.0);
    const double norm = 1.0 / (static_cast<double>(n) * bw * std::sqrt(2.0 * std::numbers::pi));
    for (int k = 0; k < kGrid; ++k) {
        const double g = ymin + step * k;
        double s = 0.0;
        for (double v : sorted) {
            const double u = (g - v) / bw;
            s += std::exp(-0.5 * u * u);
        }
        dens[static_cast<std::size_t>(k)] = s * norm;
    }

    std::vector<int> cuts = {0};
    for (int k = 1; k + 1 < kGrid; ++k) {
        const auto u = static_cast<std::size_t>(k);
        if (dens[u] < dens[u - 1] && dens[u] <= dens[u + 1]) {
            cuts.push_back(k);
        }
    }
    cuts.push_back(kGrid);
    const double total = std::accumulate(dens.begin(), dens.end(), 0.0);
    int peaks = 0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double mass = 0.0;
        for (int k = cuts[c]; k < cuts[c + 1]; ++k) {
            mass += dens[static_cast<std::size_t>(k)];
        }
        if (mass > 0.01 * total) {
            ++peaks;
        }
    }
    return std::max(peaks, 1);
}

struct FitResult {
    bool ok = false;
    double adj_r2 = 0.0;
    Vector coef;
};

FitResult least_squares(const Matrix& design, const Vector& y)
{
    FitResult fit;
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < design.cols()) {
        return fit;
    }
    fit.coef = qr.solve(y);
    const Vector resid = y - design * fit.coef;
    const double ss_res = resid.squaredNorm();
    const double ss_tot = (y.array() - y.mean()).square().sum();
    const auto n = static_cast<double>(design.rows());
    const auto p = static_cast<double>(design.cols());
    fit.adj_r2 = 1.0 - (ss_res / ss_tot) * (n - 1.0) / (n - p);
    fit.ok = true;
    return fit;
}

}  // namespace

const std::vector<std::string>& feature_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"distr.skewness",   "distr.kurtosis",   "distr.n_peaks",
                                      "meta.lin_adj_r2",  "meta.lin_coef_min", "meta.lin_coef_max",
                                      "meta.lin_coef_ratio", "meta.quad_adj_r2", "meta.quad_cond"};
        for (const char* kind : {"ratio", "diff"}) {
            for (const char* stat : {"mean", "median"}) {
                for (int q : kDispPercents) {
                    char buf[48];
                    std::snprintf(buf, sizeof(buf), "disp.%s_%s_%02d", kind, stat, q);
                    v.emplace_back(buf);
                }
            }
        }
        for (const char* n : {"ic.h_max", "ic.eps_s", "ic.m0", "ic.eps_max", "nbc.nn_nb_mean_ratio",
                              "nbc.nn_nb_sd_ratio", "nbc.nb_nn_cor", "nbc.nb_fitness_cor", "pca.expl_var_x",
                              "pca.expl_var_init", "pca.pc1_x", "pca.pc1_init"}) {
            v.emplace_back(n);
        }
        return v;
    }();
    return names;
}

namespace {

std::vector<std::string> names_slice(std::size_t first, std::size_t count)
{
    const auto& all = feature_names();
    return {all.begin() + static_cast<std::ptrdiff_t>(first), all.begin() + static_cast<std::ptrdiff_t>(first + count)};
}

}  // namespace

DistanceMatrix::DistanceMatrix(const RowMatrix& x) : n_(static_cast<std::size_t>(x.rows())), d_(n_ * n_, 0.0)
{
    const auto dim = x.cols();
    const auto n = static_cast<std::int64_t>(n_);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t j = i + 1; j < n_; ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < dim; ++k) {
                const double t = x(static_cast<Eigen::Index>(i), k) - x(static_cast<Eigen::Index>(j), k);
                s += t * t;
            }
            d_[i * n_ + j] = std::sqrt(s);
        }
    }
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            d_[j * n_ + i] = d_[i * n_ + j];
        }
    }
}

std::vector<Feature> feat_distr(const SampleSet& s)
{
    if (s.size() < 4) {
        throw ValidationError("distribution features need n >= 4");
    }
    const auto names = names_slice(0, 3);
    if (all_equal(s.y)) {
        return {invalid(names[0]), invalid(names[1]), valid(names[2], 1.0)};
    }
    const double n = static_cast<double>(s.size());
    const double mean = s.y.sum() / n;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (Eigen::Index i = 0; i < s.y.size(); ++i) {
        const double c = s.y[i] - mean;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    return {valid(names[0], m3 / std::pow(m2, 1.5)), valid(names[1], m4 / (m2 * m2) - 3.0),
            valid(names[2], count_density_peaks(s.y))};
}

std::vector<Feature> feat_meta(const SampleSet& s)
{
    const std::size_t n = s.size();
    const std::size_t d = s.dimension();
    if (n < 2 * d + 2) {
        throw ValidationError("meta-model features need n >= 2D + 2");
    }
    const auto names = names_slice(3, 6);
    if (all_equal(s.y)) {
        return all_invalid(names);
    }
    std::vector<Feature> out;

    Matrix lin(n, d + 1);
    lin.col(0).setOnes();
    lin.rightCols(d) = s.x;
    const FitResult lf = least_squares(lin, s.y);
    if (lf.ok) {
        const Vector slopes = lf.coef.tail(d).cwiseAbs();
        const double cmin = slopes.minCoeff();
        const double cmax = slopes.maxCoeff();
        out.push_back(valid(names[0], lf.adj_r2));
        out.push_back(valid(names[1], cmin));
        out.push_back(valid(names[2], cmax));
        out.push_back(cmin > 0 ? valid(names[3], cmax / cmin) : invalid(names[3]));
    } else {
        for (std::size_t k = 0; k < 4; ++k) {
            out.push_back(invalid(names[k]));
        }
    }

    Matrix quad(n, 2 * d + 1);
    quad.leftCols(d + 1) = lin;
    quad.rightCols(d) = s.x.array().square().matrix();
    const FitResult qf = least_squares(quad, s.y);
    if (qf.ok) {
        const Vector q = qf.coef.tail(d).cwiseAbs();
        out.push_back(valid(names[4], qf.adj_r2));
        out.push_back(q.minCoeff() > 0 ? valid(names[5], q.maxCoeff() / q.minCoeff()) : invalid(names[5]));
    } else {
        out.push_back(invalid(names[4]));
        out.push_back(invalid(names[5]));
    }
    return out;
}

std::vector<Feature> feat_disp(const SampleSet& s)
{
    return feat_disp(s, DistanceMatrix(s.x));
}

std::vector<Feature> feat_disp(const SampleSet& s, const DistanceMatrix& dist)
{
    const std::size_t n = s.size();
    if (n < 40) {
        throw ValidationError("dispersion features need n >= 40");
    }
    std::vector<double> all;
    all.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            all.push_back(dist(i, j));
        }
    }
    const double all_mean = mean_of(all);
    const double all_median = median_in_place(all);

    const auto order = order_by_y(s.y);
    // [kind][stat][q]
    std::array<std::array<std::array<std::optional<double>, 4>, 2>, 2> vals{};
    for (std::size_t qi = 0; qi < kDispPercents.size(); ++qi) {
        const std::size_t m = (static_cast<std::size_t>(kDispPercents[qi]) * n + 99) / 100;
        if (m < 2) {
            continue;
        }
        std::vector<double> within;
        within.reserve(m * (m - 1) / 2);
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) {
                within.push_back(dist(order[a], order[b]));
            }
        }
        const double w_mean = mean_of(within);
        const double w_median = median_in_place(within);
        if (all_mean > 0) {
            vals[0][0][qi] = w_mean / all_mean;
        }
        if (all_median > 0) {
            vals[0][1][qi] = w_median / all_median;
        }
        vals[1][0][qi] = w_mean - all_mean;
        vals[1][1][qi] = w_median - all_median;
    }
    const auto names = names_slice(9, 16);
    std::vector<Feature> out;
    std::size_t k = 0;
    for (std::size_t kind = 0; kind < 2; ++kind) {
        for (std::size_t stat = 0; stat < 2; ++stat) {
            for (std::size_t qi = 0; qi < 4; ++qi, ++k) {
                const auto& v = vals[kind][stat][qi];
                out.push_back(v ? valid(names[k], *v) : invalid(names[k]));
            }
        }
    }
    return out;
}

const std::vector<double>& ic_epsilon_grid()
{
    static const std::vector<double> grid = [] {
        std::vector<double> g = {0.0};
        for (int k = 0; k < 1000; ++k) {
            g.push_back(std::pow(10.0, -5.0 + 20.0 * k / 999.0));
        }
        return g;
    }();
    return grid;
}

std::size_t ic_tour_start(const SampleSet& s, std::uint64_t tour_seed)
{
    const auto order = order_by_y(s.y);
    Rng rng = Rng::stream({tour_seed, kTagTourStart});
    return order[rng.below(order.size())];
}

std::vector<std::size_t> nearest_neighbor_tour(const DistanceMatrix& dist, std::size_t start)
{
    const std::size_t n = dist.size();
    std::vector<char> visited(n, 0);
    std::vector<std::size_t> tour;
    tour.reserve(n);
    std::size_t cur = start;
    visited[cur] = 1;
    tour.push_back(cur);
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t best = n;
        double best_d = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (!visited[j] && (best == n || dist(cur, j) < best_d)) {
                best = j;
                best_d = dist(cur, j);
            }
        }
        visited[best] = 1;
        tour.push_back(best);
        cur = best;
    }
    return tour;
}

IcCurve ic_curve(const SampleSet& s, std::uint64_t tour_seed, const DistanceMatrix& dist)
{
    const std::size_t n = s.size();
    const auto tour = nearest_neighbor_tour(dist, ic_tour_start(s, tour_seed));
    std::vector<double> slopes;
    slopes.reserve(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = dist(tour[i], tour[i + 1]);
        if (d > 0) {
            slopes.push_back((s.y[static_cast<Eigen::Index>(tour[i + 1])] - s.y[static_cast<Eigen::Index>(tour[i])]) / d);
        }
    }

    IcCurve curve;
    curve.epsilon = ic_epsilon_grid();
    curve.slope_count = slopes.size();
    if (slopes.size() < 2) {
        return curve;
    }
    const double log6 = std::log(6.0);
    const double pair_count = static_cast<double>(slopes.size() - 1);
    std::vector<int> sym(slopes.size());
    for (double eps : curve.epsilon) {
        for (std::size_t i = 0; i < slopes.size(); ++i) {
            sym[i] = slopes[i] < -eps ? -1 : (slopes[i] > eps ? 1 : 0);
        }
        // counts[a+1][b+1] for consecutive symbols a, b.
        std::array<std::array<int, 3>, 3> counts{};
        for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
            ++counts[static_cast<std::size_t>(sym[i] + 1)][static_cast<std::size_t>(sym[i + 1] + 1)];
        }
        double h = 0.0;
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t b = 0; b < 3; ++b) {
                if (a != b && counts[a][b] > 0) {
                    const double p = counts[a][b] / pair_count;
                    h -= p * std::log(p) / log6;
                }
            }
        }
        std::size_t runs = 0;
        int last = 0;
        for (int v : sym) {
            if (v != 0 && v != last) {
                ++runs;
                last = v;
            }
        }
        curve.entropy.push_back(h);
        curve.partial.push_back(static_cast<double>(runs) / static_cast<double>(n - 1));
    }
    return curve;
}

std::vector<Feature> feat_ic(const SampleSet& s, std::uint64_t tour_seed)
{
    return feat_ic(s, tour_seed, DistanceMatrix(s.x));
}

std::vector<Feature> feat_ic(const SampleSet& s, std::uint64_t tour_seed, const DistanceMatrix& dist)
{
    if (s.size() < 3) {
        throw ValidationError("information content features need n >= 3");
    }
    const auto names = names_slice(25, 4);
    const IcCurve c = ic_curve(s, tour_seed, dist);
    if (c.slope_count < 2) {
        return all_invalid(names);
    }
    std::size_t arg = 0;
    for (std::size_t k = 1; k < c.entropy.size(); ++k) {
        if (c.entropy[k] > c.entropy[arg]) {
            arg = k;
        }
    }
    std::optional<double> eps_s;
    for (std::size_t k = 0; k < c.entropy.size(); ++k) {
        if (c.entropy[k] < kIcEntropyThreshold) {
            if (c.epsilon[k] > 0) {
                eps_s = std::log10(c.epsilon[k]);
            }
            break;
        }
    }
    return {valid(names[0], c.entropy[arg]), eps_s ? valid(names[1], *eps_s) : invalid(names[1]),
            valid(names[2], c.partial[0]), valid(names[3], c.epsilon[arg])};
}

std::vector<Feature> feat_nbc(const SampleSet& s)
{
    return feat_nbc(s, DistanceMatrix(s.x));
}

std::vector<Feature> feat_nbc(const SampleSet& s, const DistanceMatrix& dist)
{
    const std::size_t n = s.size();
    if (n < 5) {
        throw ValidationError("nearest-better features need n >= 5");
    }
    const auto names = names_slice(29, 4);
    if (all_equal(s.y)) {
        return all_invalid(names);
    }
    std::vector<double> nn(n);
    std::vector<double> nb(n);
    std::vector<double> indegree(n, 0.0);
    std::vector<double> y(s.y.data(), s.y.data() + n);
    for (std::size_t i = 0; i < n; ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        double nearest_better = std::numeric_limits<double>::infinity();
        double farthest = 0.0;
        std::size_t better_idx = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const double d = dist(i, j);
            nearest = std::min(nearest, d);
            farthest = std::max(farthest, d);
            if (y[j] < y[i] && d < nearest_better) {
                nearest_better = d;
                better_idx = j;
            }
        }
        nn[i] = nearest;
        if (better_idx == n) {
            nb[i] = farthest;
        } else {
            nb[i] = nearest_better;
            indegree[better_idx] += 1.0;
        }
    }
    const double mean_nb = mean_of(nb);
    const double sd_nb = sample_sd(nb);
    const auto cor_nn_nb = pearson(nn, nb);
    const auto cor_fit = pearson(y, indegree);
    return {mean_nb > 0 ? valid(names[0], mean_of(nn) / mean_nb) : invalid(names[0]),
            sd_nb > 0 ? valid(names[1], sample_sd(nn) / sd_nb) : invalid(names[1]),
            cor_nn_nb ? valid(names[2], *cor_nn_nb) : invalid(names[2]),
            cor_fit ? valid(names[3], *cor_fit) : invalid(names[3])};
}

namespace {

/// (explained-variance share of the first component, fraction of
/// components needed for 90%); nullopt when the total variance is zero.
std::optional<std::pair<double, double>> pca_summary(const Matrix& data)
{
    const Matrix centered = data.rowwise() - data.colwise().mean();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(data.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov, Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    for (auto& v : ev) {
        v = std::max(v, 0.0);
    }
    std::sort(ev.begin(), ev.end(), std::greater<>());
    const double total = std::accumulate(ev.begin(), ev.end(), 0.0);
    if (!(total > 0)) {
        return std::nullopt;
    }
    double cum = 0.0;
    std::size_t k = 0;
    while (k < ev.size()) {
        cum += ev[k++];
        if (cum >= kPcaVarianceShare * total * (1.0 - 1e-12)) {
            break;
        }
    }
    return std::make_pair(ev[0] / total, static_cast<double>(k) / static_cast<double>(ev.size()));
}

}  // namespace

std::vector<Feature> feat_pca(const SampleSet& s)
{
    const std::size_t n = s.size();
    const std::size_t d = s.dimension();
    if (n <= d + 1) {
        throw ValidationError("PCA features need n > D + 1");
    }
    const auto names = names_slice(33, 4);
    const Matrix x = s.x;
    Matrix xy(n, d + 1);
    xy.leftCols(d) = x;
    xy.col(static_cast<Eigen::Index>(d)) = s.y;
    const auto px = pca_summary(x);
    const auto pxy = pca_summary(xy);
    return {px ? valid(names[0], px->second) : invalid(names[0]),
            pxy ? valid(names[1], pxy->second) : invalid(names[1]), px ? valid(names[2], px->first) : invalid(names[2]),
            pxy ? valid(names[3], pxy->first) : invalid(names[3])};
}

FeatureVector extract_all(const SampleSet& s, std::uint64_t tour_seed)
{
    sampling::validate(s);
    FeatureVector fv{s.problem_id, {}};
    fv.values.reserve(kFeatureCount);
    const DistanceMatrix dist(s.x);

    const auto append = [&](std::size_t first, std::size_t count, auto&& group) {
        try {
            auto feats = group();
            fv.values.insert(fv.values.end(), feats.begin(), feats.end());
        } catch (const ValidationError&) {
            for (auto& n : names_slice(first, count)) {
                fv.values.push_back(invalid(std::move(n)));
            }
        }
    };
    append(0, 3, [&] { return feat_distr(s); });
    append(3, 6, [&] { return feat_meta(s); });
    append(9, 16, [&] { return feat_disp(s, dist); });
    append(25, 4, [&] { return feat_ic(s, tour_seed, dist); });
    append(29, 4, [&] { return feat_nbc(s, dist); });
    append(33, 4, [&] { return feat_pca(s); });
    return fv;
}

}  // namespace cocoela::ela
