#include "cocoela/bbob.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/QR>

namespace cocoela::bbob {

namespace {

constexpr std::uint64_t kTagRotationR = 1;
constexpr std::uint64_t kTagRotationQ = 2;
constexpr std::uint64_t kTagShift = 3;
constexpr std::uint64_t kTagFopt = 4;
constexpr std::uint64_t kTagPeaks = 5;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double rosenbrock_scale(std::size_t dimension)
{
    return std::max(1.0, std::sqrt(static_cast<double>(dimension)) / 8.0);
}

double rastrigin_sum(const Vector& z)
{
    double cos_sum = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        cos_sum += std::cos(kTwoPi * z[i]);
    }
    return 10.0 * (static_cast<double>(z.size()) - cos_sum) + z.squaredNorm();
}

Vector t_osz_vec(Vector v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = t_osz(v[i]);
    }
    return v;
}

double exponent_ratio(std::size_t i, std::size_t dimension)
{
    return static_cast<double>(i) / static_cast<double>(dimension - 1);
}

double weierstrass_term(double z)
{
    double s = 0.0;
    for (int k = 0; k < 12; ++k) {
        s += std::pow(0.5, k) * std::cos(kTwoPi * std::pow(3.0, k) * (z + 0.5));
    }
    return s;
}

}  // namespace

double t_osz(double x)
{
    if (x == 0.0) {
        return 0.0;
    }
    const double xh = std::log(std::abs(x));
    const double c1 = x > 0 ? 10.0 : 5.5;
    const double c2 = x > 0 ? 7.9 : 3.1;
    const double sign = x > 0 ? 1.0 : -1.0;
    return sign * std::exp(xh + 0.049 * (std::sin(c1 * xh) + std::sin(c2 * xh)));
}

void t_asy(Vector& x, double beta)
{
    const auto d = static_cast<std::size_t>(x.size());
    for (std::size_t i = 0; i < d; ++i) {
        if (x[i] > 0) {
            x[i] = std::pow(x[i], 1.0 + beta * exponent_ratio(i, d) * std::sqrt(x[i]));
        }
    }
}

Vector lambda(double alpha, std::size_t dimension)
{
    Vector l(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
        l[i] = std::pow(alpha, 0.5 * exponent_ratio(i, dimension));
    }
    return l;
}

double f_pen(const Vector& x)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double excess = std::abs(x[i]) - 5.0;
        if (excess > 0) {
            s += excess * excess;
        }
    }
    return s;
}

Matrix random_rotation(std::size_t dimension, Rng& rng)
{
    Matrix a(dimension, dimension);
    // Fill column by column so the draw order is independent of Eigen's layout.
    for (std::size_t j = 0; j < dimension; ++j) {
        for (std::size_t i = 0; i < dimension; ++i) {
            a(i, j) = rng.normal();
        }
    }
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    const Matrix& r = qr.matrixQR();
    for (std::size_t j = 0; j < dimension; ++j) {
        if (r(j, j) < 0) {
            q.col(j) = -q.col(j);
        }
    }
    return q;
}

const char* function_name(int function_id)
{
    static const char* const names[] = {
        "sphere", "ellipsoid", "rastrigin", "bueche-rastrigin", "linear-slope",
        "attractive-sector", "step-ellipsoid", "rosenbrock", "rosenbrock-rotated",
        "ellipsoid-rotated", "discus", "bent-cigar", "sharp-ridge", "different-powers",
        "rastrigin-rotated", "weierstrass", "schaffers-f7", "schaffers-f7-ill",
        "griewank-rosenbrock", "schwefel", "gallagher-101", "gallagher-21", "katsuura",
        "lunacek-bi-rastrigin"};
    if (function_id < 1 || function_id > kFunctionCount) {
        return "unknown";
    }
    return names[function_id - 1];
}

BbobInstance::BbobInstance(int function_id, std::size_t dimension, std::uint64_t instance_seed)
    : function_id_(function_id), dimension_(dimension), seed_(instance_seed)
{
    if (function_id < 1 || function_id > kFunctionCount) {
        throw ValidationError("BBOB function_id " + std::to_string(function_id) +
                              " out of range; valid range is 1..24");
    }
    if (dimension < 2) {
        throw ValidationError("BBOB dimension must be >= 2, got " + std::to_string(dimension));
    }
    const auto fid = static_cast<std::uint64_t>(function_id);
    const std::size_t d = dimension;

    std::vector<double> u(d, 0.0);
    if (instance_seed == 0) {
        r_ = Matrix::Identity(d, d);
        q_ = Matrix::Identity(d, d);
    } else {
        Rng rr = Rng::stream({instance_seed, fid, d, kTagRotationR});
        Rng rq = Rng::stream({instance_seed, fid, d, kTagRotationQ});
        r_ = random_rotation(d, rr);
        q_ = random_rotation(d, rq);
        Rng rs = Rng::stream({instance_seed, fid, d, kTagShift});
        for (auto& v : u) {
            v = rs.uniform(-4.0, 4.0);
        }
        Rng rf = Rng::stream({instance_seed, fid, d, kTagFopt});
        const double n1 = rf.normal();
        const double n2 = std::max(std::abs(rf.normal()), 1e-12);
        f_opt_ = std::clamp(std::round(100.0 * n1 / n2) / 100.0, -1000.0, 1000.0);
    }

    const auto sign_of = [](double v) { return v < 0 ? -1.0 : 1.0; };
    x_opt_ = u;
    switch (function_id) {
    case 4:
        for (std::size_t i = 0; i < d; i += 2) {
            x_opt_[i] = std::abs(u[i]);
        }
        break;
    case 5:
        for (std::size_t i = 0; i < d; ++i) {
            x_opt_[i] = 5.0 * sign_of(u[i]);
        }
        break;
    case 8:
        for (auto& v : x_opt_) {
            v *= 0.75;
        }
        break;
    case 9:
    case 19: {
        const Vector z_opt = Vector::Constant(d, 0.5 / rosenbrock_scale(d));
        const Vector x = r_.transpose() * z_opt;
        x_opt_.assign(x.data(), x.data() + d);
        break;
    }
    case 20:
        for (std::size_t i = 0; i < d; ++i) {
            x_opt_[i] = 0.5 * 4.2096874633 * sign_of(u[i]);
        }
        break;
    case 21: {
        Rng rp = Rng::stream({instance_seed, fid, d, kTagPeaks});
        init_gallagher(101, 1000.0, rp);
        break;
    }
    case 22: {
        for (auto& v : x_opt_) {
            v *= 0.98;
        }
        Rng rp = Rng::stream({instance_seed, fid, d, kTagPeaks});
        init_gallagher(21, 1000.0 * 1000.0, rp);
        break;
    }
    case 24:
        for (std::size_t i = 0; i < d; ++i) {
            x_opt_[i] = 1.25 * sign_of(u[i]);
        }
        break;
    default:
        break;
    }
}

void BbobInstance::init_gallagher(int peak_count, double first_peak_alpha, Rng& rng)
{
    const std::size_t d = dimension_;
    const int others = peak_count - 1;

    // Condition numbers of the secondary peaks: a random permutation of
    // 1000^(2j/(others-1)), j = 0..others-1.
    std::vector<double> alphas(static_cast<std::size_t>(others));
    for (int j = 0; j < others; ++j) {
        alphas[static_cast<std::size_t>(j)] = std::pow(1000.0, 2.0 * j / (others - 1));
    }
    for (std::size_t j = alphas.size(); j > 1; --j) {
        std::swap(alphas[j - 1], alphas[rng.below(j)]);
    }

    peaks_.clear();
    peaks_.reserve(static_cast<std::size_t>(peak_count));
    for (int p = 0; p < peak_count; ++p) {
        const double alpha = p == 0 ? first_peak_alpha : alphas[static_cast<std::size_t>(p - 1)];
        Vector center(d);
        if (p == 0) {
            center = Eigen::Map<const Vector>(x_opt_.data(), static_cast<Eigen::Index>(d));
        } else {
            for (std::size_t i = 0; i < d; ++i) {
                center[i] = rng.uniform(-4.9, 4.9);
            }
        }
        // Diagonal of Lambda^alpha / alpha^(1/4) in random order.
        Vector w = lambda(alpha, d) / std::pow(alpha, 0.25);
        for (std::size_t j = d; j > 1; --j) {
            std::swap(w[static_cast<Eigen::Index>(j - 1)], w[static_cast<Eigen::Index>(rng.below(j))]);
        }
        const double height = p == 0 ? 10.0 : 1.1 + 8.0 * (p - 1) / (peak_count - 2);
        peaks_.push_back(Peak{r_ * center, std::move(w), height});
    }
}

double BbobInstance::gallagher(const Vector& x) const
{
    const Vector rx = r_ * x;
    const double inv_2d = 1.0 / (2.0 * static_cast<double>(dimension_));
    double best = 0.0;
    for (const auto& peak : peaks_) {
        const double quad = (peak.weights.array() * (rx - peak.rotated_center).array().square()).sum();
        best = std::max(best, peak.height * std::exp(-inv_2d * quad));
    }
    const double t = t_osz(10.0 - best);
    return t * t + f_pen(x);
}

bool BbobInstance::operator==(const BbobInstance& other) const
{
    return function_id_ == other.function_id_ && dimension_ == other.dimension_ && seed_ == other.seed_ &&
           f_opt_ == other.f_opt_ && x_opt_ == other.x_opt_ && r_ == other.r_ && q_ == other.q_;
}

double BbobInstance::operator()(std::span<const double> xs) const
{
    if (xs.size() != dimension_) {
        throw ValidationError("dimension mismatch: expected " + std::to_string(dimension_) + ", received " +
                              std::to_string(xs.size()));
    }
    const std::size_t d = dimension_;
    const auto n = static_cast<Eigen::Index>(d);
    const Vector x = Eigen::Map<const Vector>(xs.data(), n);
    const Vector xopt = Eigen::Map<const Vector>(x_opt_.data(), n);
    const Vector diff = x - xopt;

    double f = 0.0;
    switch (function_id_) {
    case 1:
        f = diff.squaredNorm();
        break;
    case 2: {
        const Vector z = t_osz_vec(diff);
        for (std::size_t i = 0; i < d; ++i) {
            f += std::pow(10.0, 6.0 * exponent_ratio(i, d)) * z[i] * z[i];
        }
        break;
    }
    case 3: {
        Vector z = t_osz_vec(diff);
        t_asy(z, 0.2);
        z = lambda(10.0, d).cwiseProduct(z);
        f = rastrigin_sum(z);
        break;
    }
    case 4: {
        Vector z = t_osz_vec(diff);
        for (std::size_t i = 0; i < d; ++i) {
            double s = std::pow(10.0, 0.5 * exponent_ratio(i, d));
            if (i % 2 == 0 && z[i] > 0) {
                s *= 10.0;
            }
            z[i] *= s;
        }
        f = rastrigin_sum(z) + 100.0 * f_pen(x);
        break;
    }
    case 5:
        for (std::size_t i = 0; i < d; ++i) {
            const double s = (xopt[i] < 0 ? -1.0 : 1.0) * std::pow(10.0, exponent_ratio(i, d));
            const double z = xopt[i] * x[i] < 25.0 ? x[i] : xopt[i];
            f += 5.0 * std::abs(s) - s * z;
        }
        break;
    case 6: {
        const Vector z = q_ * lambda(10.0, d).cwiseProduct(r_ * diff);
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double w = z[i] * xopt[i] > 0 ? 100.0 : 1.0;
            s += (w * z[i]) * (w * z[i]);
        }
        f = std::pow(t_osz(s), 0.9);
        break;
    }
    case 7: {
        const Vector zh = lambda(10.0, d).cwiseProduct(r_ * diff);
        Vector zt(n);
        for (std::size_t i = 0; i < d; ++i) {
            zt[i] = std::abs(zh[i]) > 0.5 ? std::floor(0.5 + zh[i]) : std::floor(0.5 + 10.0 * zh[i]) / 10.0;
        }
        const Vector z = q_ * zt;
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            s += std::pow(10.0, 2.0 * exponent_ratio(i, d)) * z[i] * z[i];
        }
        f = 0.1 * std::max(std::abs(zh[0]) / 1e4, s) + f_pen(x);
        break;
    }
    case 8:
    case 9:
    case 19: {
        const double c = rosenbrock_scale(d);
        const Vector z = function_id_ == 8 ? Vector(c * diff + Vector::Ones(n))
                                           : Vector(c * (r_ * x) + Vector::Constant(n, 0.5));
        for (std::size_t i = 0; i + 1 < d; ++i) {
            const double a = z[i] * z[i] - z[i + 1];
            const double b = z[i] - 1.0;
            const double s = 100.0 * a * a + b * b;
            f += function_id_ == 19 ? s / 4000.0 - std::cos(s) : s;
        }
        if (function_id_ == 19) {
            f = 10.0 * f / static_cast<double>(d - 1) + 10.0;
        }
        break;
    }
    case 10:
    case 11: {
        const Vector z = t_osz_vec(r_ * diff);
        for (std::size_t i = 0; i < d; ++i) {
            const double w = function_id_ == 10 ? std::pow(10.0, 6.0 * exponent_ratio(i, d)) : (i == 0 ? 1e6 : 1.0);
            f += w * z[i] * z[i];
        }
        break;
    }
    case 12: {
        Vector y = r_ * diff;
        t_asy(y, 0.5);
        const Vector z = r_ * y;
        f = z[0] * z[0] + 1e6 * z.tail(n - 1).squaredNorm();
        break;
    }
    case 13: {
        const Vector z = q_ * lambda(10.0, d).cwiseProduct(r_ * diff);
        f = z[0] * z[0] + 100.0 * z.tail(n - 1).norm();
        break;
    }
    case 14: {
        const Vector z = r_ * diff;
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            s += std::pow(std::abs(z[i]), 2.0 + 4.0 * exponent_ratio(i, d));
        }
        f = std::sqrt(s);
        break;
    }
    case 15: {
        Vector y = t_osz_vec(r_ * diff);
        t_asy(y, 0.2);
        const Vector z = r_ * lambda(10.0, d).cwiseProduct(q_ * y);
        f = rastrigin_sum(z);
        break;
    }
    case 16: {
        const Vector z = r_ * lambda(0.01, d).cwiseProduct(q_ * t_osz_vec(r_ * diff));
        const double f0 = weierstrass_term(0.0);
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            s += weierstrass_term(z[i]);
        }
        const double inner = s / static_cast<double>(d) - f0;
        f = 10.0 * inner * inner * inner + 10.0 / static_cast<double>(d) * f_pen(x);
        break;
    }
    case 17:
    case 18: {
        Vector y = r_ * diff;
        t_asy(y, 0.5);
        const Vector z = lambda(function_id_ == 17 ? 10.0 : 1000.0, d).cwiseProduct(q_ * y);
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < d; ++i) {
            const double si = std::sqrt(z[i] * z[i] + z[i + 1] * z[i + 1]);
            const double root = std::sqrt(si);
            const double sn = std::sin(50.0 * std::pow(si, 0.2));
            s += root + root * sn * sn;
        }
        s /= static_cast<double>(d - 1);
        f = s * s + 10.0 * f_pen(x);
        break;
    }
    case 20: {
        Vector xh(n);
        for (std::size_t i = 0; i < d; ++i) {
            xh[i] = 2.0 * (xopt[i] < 0 ? -1.0 : 1.0) * x[i];
        }
        const Vector two_abs_opt = 2.0 * xopt.cwiseAbs();
        Vector zh = xh;
        for (std::size_t i = 1; i < d; ++i) {
            zh[i] = xh[i] + 0.25 * (xh[i - 1] - two_abs_opt[i - 1]);
        }
        const Vector z = 100.0 * (lambda(10.0, d).cwiseProduct(zh - two_abs_opt) + two_abs_opt);
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            s += z[i] * std::sin(std::sqrt(std::abs(z[i])));
        }
        f = -s / (100.0 * static_cast<double>(d)) + 4.189828872724339 + 100.0 * f_pen(z / 100.0);
        break;
    }
    case 21:
    case 22:
        f = gallagher(x);
        break;
    case 23: {
        const Vector z = q_ * lambda(100.0, d).cwiseProduct(r_ * diff);
        const double dd = static_cast<double>(d);
        const double expo = 10.0 / std::pow(dd, 1.2);
        double prod = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 1; j <= 32; ++j) {
                const double p = std::ldexp(1.0, j);
                s += std::abs(p * z[i] - std::round(p * z[i])) / p;
            }
            prod *= std::pow(1.0 + static_cast<double>(i + 1) * s, expo);
        }
        f = 10.0 / (dd * dd) * prod - 10.0 / (dd * dd) + f_pen(x);
        break;
    }
    case 24: {
        const double mu0 = 2.5;
        const double dd = static_cast<double>(d);
        const double s = 1.0 - 1.0 / (2.0 * std::sqrt(dd + 20.0) - 8.2);
        const double mu1 = -std::sqrt((mu0 * mu0 - 1.0) / s);
        Vector xh(n);
        for (std::size_t i = 0; i < d; ++i) {
            xh[i] = 2.0 * (xopt[i] < 0 ? -1.0 : 1.0) * x[i];
        }
        const Vector z = q_ * lambda(100.0, d).cwiseProduct(r_ * (xh - Vector::Constant(n, mu0)));
        const double near = (xh.array() - mu0).square().sum();
        const double far = dd + s * (xh.array() - mu1).square().sum();
        double cos_sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            cos_sum += std::cos(kTwoPi * z[i]);
        }
        f = std::min(near, far) + 10.0 * (dd - cos_sum) + 1e4 * f_pen(x);
        break;
    }
    default:
        throw InternalError("unhandled BBOB function " + std::to_string(function_id_));
    }
    return f + f_opt_;
}

}  // namespace cocoela::bbob
