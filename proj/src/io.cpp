#include "cocoela/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace cocoela::io {

namespace {

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) {
            pos = text.size();
        }
        auto line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!line.empty()) {
            out.push_back(line);
        }
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view s)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ValidationError("cannot parse number '" + std::string(s) + "'");
    }
    return v;
}

std::size_t parse_index(std::string_view s)
{
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ValidationError("cannot parse index '" + std::string(s) + "'");
    }
    return v;
}

std::string id_label(const ProblemId& id)
{
    return std::string(to_string(id.set)) + ',' + std::to_string(id.index);
}

}  // namespace

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw InternalError("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw std::runtime_error("write to '" + path.string() + "' failed");
    }
}

std::string feature_matrix_to_csv(const subspace::FeatureMatrix& m)
{
    std::ostringstream os;
    os << "set_label,index";
    for (const auto& c : m.columns()) {
        os << ',' << c;
    }
    os << '\n';
    for (std::size_t r = 0; r < m.row_count(); ++r) {
        os << id_label(m.rows()[r]);
        for (std::size_t c = 0; c < m.column_count(); ++c) {
            const auto v = m.at(r, c);
            os << ',' << (v ? format_double(*v) : "NA");
        }
        os << '\n';
    }
    return os.str();
}

subspace::FeatureMatrix feature_matrix_from_csv(std::string_view text)
{
    const auto lines = lines_of(text);
    if (lines.empty()) {
        throw ValidationError("feature CSV is empty");
    }
    const auto header = split(lines[0]);
    if (header.size() < 3 || header[0] != "set_label" || header[1] != "index") {
        throw ValidationError("feature CSV header must start with set_label,index");
    }
    std::vector<std::string> columns(header.begin() + 2, header.end());
    std::vector<ProblemId> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split(lines[i]);
        if (cells.size() != header.size()) {
            throw ValidationError("feature CSV row " + std::to_string(i) + " has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(header.size()));
        }
        rows.push_back({parse_set_label(cells[0]), parse_index(cells[1])});
    }
    subspace::FeatureMatrix m(rows, columns);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split(lines[i]);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto cell = cells[c + 2];
            m.set(i - 1, c, cell == "NA" ? std::nullopt : std::optional<double>(parse_double(cell)));
        }
    }
    return m;
}

std::string coordinates_to_csv(const std::vector<ProblemId>& rows, const Matrix& coords)
{
    std::ostringstream os;
    os << "set_label,index";
    for (Eigen::Index c = 0; c < coords.cols(); ++c) {
        os << ",c" << (c + 1);
    }
    os << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        os << id_label(rows[r]);
        for (Eigen::Index c = 0; c < coords.cols(); ++c) {
            os << ',' << format_double(coords(static_cast<Eigen::Index>(r), c));
        }
        os << '\n';
    }
    return os.str();
}

Coordinates coordinates_from_csv(std::string_view text)
{
    const auto lines = lines_of(text);
    if (lines.size() < 2) {
        throw ValidationError("coordinate CSV holds no rows");
    }
    const auto header = split(lines[0]);
    if (header.size() < 3 || header[0] != "set_label" || header[1] != "index") {
        throw ValidationError("coordinate CSV header must start with set_label,index");
    }
    const auto k = static_cast<Eigen::Index>(header.size() - 2);
    Coordinates out{{}, Matrix(static_cast<Eigen::Index>(lines.size() - 1), k)};
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split(lines[i]);
        if (cells.size() != header.size()) {
            throw ValidationError("coordinate CSV row " + std::to_string(i) + " has the wrong cell count");
        }
        out.rows.push_back({parse_set_label(cells[0]), parse_index(cells[1])});
        for (Eigen::Index c = 0; c < k; ++c) {
            out.values(static_cast<Eigen::Index>(i - 1), c) = parse_double(cells[static_cast<std::size_t>(c) + 2]);
        }
    }
    return out;
}

std::string embedding_to_csv(const analysis::Embedding2D& e)
{
    std::ostringstream os;
    os << "set_label,index,ex,ey\n";
    for (std::size_t r = 0; r < e.rows.size(); ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        os << id_label(e.rows[r]) << ',' << format_double(e.coords(i, 0)) << ',' << format_double(e.coords(i, 1))
           << '\n';
    }
    return os.str();
}

std::string correlation_matrix_to_csv(const analysis::CorrelationMatrix& m, const std::vector<ProblemId>& rows)
{
    std::ostringstream os;
    os << "problem";
    for (const auto& id : rows) {
        os << ',' << to_string(id);
    }
    os << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        os << to_string(rows[i]);
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (m.valid[i] && m.valid[j]) {
                os << ',' << format_double(m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            } else {
                os << ",NA";
            }
        }
        os << '\n';
    }
    return os.str();
}

std::string edges_to_csv(const analysis::CorrelationGraph& g)
{
    std::ostringstream os;
    os << "i,j,r\n";
    for (const auto& e : g.edges) {
        os << e.i << ',' << e.j << ',' << format_double(e.r) << '\n';
    }
    return os.str();
}

}  // namespace cocoela::io
