#ifndef COCOELA_BBOB_HPP
#define COCOELA_BBOB_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "cocoela/common.hpp"
#include "cocoela/rng.hpp"

namespace cocoela::bbob {

inline constexpr int kFunctionCount = 24;

/// One instance of a noiseless BBOB function: the optimum location, the
/// orthogonal transforms drawn from the instance seed, and the optimal value.
///
/// Instance seed 0 is the identity instance: no rotation, f_opt = 0 and the
/// optimum at the origin wherever the function definition allows it (the
/// linear slope, Schwefel, Lunacek and the two Rosenbrock variants pin the
/// optimum elsewhere by construction).
class BbobInstance {
public:
    BbobInstance(int function_id, std::size_t dimension, std::uint64_t instance_seed);

    int function_id() const { return function_id_; }
    std::size_t dimension() const { return dimension_; }
    std::uint64_t rotation_seed() const { return seed_; }
    double f_opt() const { return f_opt_; }
    /// x_opt.
    const std::vector<double>& shift() const { return x_opt_; }
    const Matrix& rotation_r() const { return r_; }
    const Matrix& rotation_q() const { return q_; }

    double operator()(std::span<const double> x) const;

    bool operator==(const BbobInstance& other) const;

private:
    struct Peak {
        Vector rotated_center;
        Vector weights;
        double height;
    };

    void init_gallagher(int peak_count, double first_peak_alpha, Rng& rng);
    double gallagher(const Vector& x) const;

    int function_id_;
    std::size_t dimension_;
    std::uint64_t seed_;
    double f_opt_ = 0.0;
    std::vector<double> x_opt_;
    Matrix r_;
    Matrix q_;
    std::vector<Peak> peaks_;
};

/// Random orthogonal matrix (QR of a Gaussian matrix, sign-fixed so the
/// triangular factor has a positive diagonal).
Matrix random_rotation(std::size_t dimension, Rng& rng);

/// Elementwise oscillation transform T_osz.
double t_osz(double x);
/// Asymmetry transform T_asy^beta applied in place.
void t_asy(Vector& x, double beta);
/// Diagonal of the conditioning matrix Lambda^alpha.
Vector lambda(double alpha, std::size_t dimension);
/// Boundary penalty: sum of max(0, |x_i| - 5)^2.
double f_pen(const Vector& x);

const char* function_name(int function_id);

}  // namespace cocoela::bbob

#endif
