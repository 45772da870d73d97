#ifndef COCOELA_COMMON_HPP
#define COCOELA_COMMON_HPP

#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace cocoela {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Sample designs are stored row-major so each point is a contiguous span.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Bad input: wrong shapes, out-of-range parameters, malformed files.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation hit a state that valid inputs should never produce.
class InternalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SetLabel { Coco, Generated };

std::string_view to_string(SetLabel label);
SetLabel parse_set_label(std::string_view text);

struct ProblemId {
    SetLabel set = SetLabel::Coco;
    std::size_t index = 0;

    auto operator<=>(const ProblemId&) const = default;
};

std::string to_string(const ProblemId& id);

class BoxBounds {
public:
    BoxBounds(std::vector<double> lower, std::vector<double> upper);

    /// The [lo, hi]^dimension box.
    static BoxBounds cube(std::size_t dimension, double lo, double hi);

    std::size_t dimension() const { return lower_.size(); }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    bool contains(std::span<const double> x) const;

    bool operator==(const BoxBounds&) const = default;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

/// Domain shared by every problem in a run.
inline constexpr double kDomainLower = -5.0;
inline constexpr double kDomainUpper = 5.0;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace cocoela

#endif
