#ifndef COCOELA_ANALYSIS_HPP
#define COCOELA_ANALYSIS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cocoela/common.hpp"

namespace cocoela::analysis {

struct TsneParams {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double exaggeration_factor = 12.0;
    int exaggeration_iters = 250;
    int momentum_switch_iter = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct Embedding2D {
    std::vector<ProblemId> rows;
    /// n x 2, same row order as the input.
    Matrix coords;
    TsneParams params;
    double initial_kl = 0.0;
    double final_kl = 0.0;
};

/// Row-conditional Gaussian affinities with per-point precisions chosen so
/// each row's Shannon entropy (bits) matches log2(perplexity).
struct Affinities {
    /// conditional(i, j) = p_{j|i}; zero diagonal.
    Matrix conditional;
    std::vector<double> precision;
};

inline constexpr double kEntropyTolerance = 1e-4;

Affinities calibrate_affinities(const Matrix& squared_distances, double perplexity);

/// Exact t-SNE. Points are processed in ProblemId order and each point's
/// start position is drawn from a stream keyed by its id, so permuting the
/// input rows permutes the output rows and nothing else.
Embedding2D tsne(const Matrix& coords, const std::vector<ProblemId>& rows, const TsneParams& params);

struct CorrelationMatrix {
    Matrix values;
    /// Rows whose representation vector has zero spread.
    std::vector<char> valid;
    bool low_dimension = false;
};

/// Pearson correlation between the k-dimensional representation vectors of
/// every pair of problems (rows of coords).
CorrelationMatrix pearson_matrix(const Matrix& coords);

struct Edge {
    std::size_t i = 0;
    std::size_t j = 0;
    double r = 0.0;

    bool operator==(const Edge&) const = default;
};

struct CorrelationGraph {
    std::vector<ProblemId> nodes;
    std::vector<Edge> edges;
    double threshold = 0.0;
};

CorrelationGraph build_graph(const CorrelationMatrix& matrix, const std::vector<ProblemId>& nodes,
                             double threshold);

struct SeparationReport {
    std::string mode;
    double silhouette = 0.0;
    double coco_mean = 0.0;
    double generated_mean = 0.0;
    std::size_t coco_count = 0;
    std::size_t generated_count = 0;
};

SeparationReport silhouette(const Matrix& coords, const std::vector<ProblemId>& rows, std::string mode = "");

nlohmann::json report_to_json(const SeparationReport& report);

}  // namespace cocoela::analysis

#endif
