#ifndef COCOELA_IO_HPP
#define COCOELA_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cocoela/analysis.hpp"
#include "cocoela/ela.hpp"
#include "cocoela/subspace.hpp"

namespace cocoela::io {

std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
/// Creates parent directories as needed.
void write_file(const std::filesystem::path& path, std::string_view content);

/// set_label,index,<features...>; invalid entries as NA.
std::string feature_matrix_to_csv(const subspace::FeatureMatrix& m);
subspace::FeatureMatrix feature_matrix_from_csv(std::string_view text);

/// set_label,index,c1..ck
std::string coordinates_to_csv(const std::vector<ProblemId>& rows, const Matrix& coords);
struct Coordinates {
    std::vector<ProblemId> rows;
    Matrix values;
};
Coordinates coordinates_from_csv(std::string_view text);

/// set_label,index,ex,ey
std::string embedding_to_csv(const analysis::Embedding2D& e);

/// Full n x n matrix with problem ids labelling rows and columns.
std::string correlation_matrix_to_csv(const analysis::CorrelationMatrix& m, const std::vector<ProblemId>& rows);
/// i,j,r
std::string edges_to_csv(const analysis::CorrelationGraph& g);

}  // namespace cocoela::io

#endif
