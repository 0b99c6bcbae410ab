#include "eivreg/matrix_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "eivreg/errors.hpp"

namespace eivreg::io {

namespace fs = std::filesystem;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) throw NumericalError("cannot format double");
    return std::string(buf.data(), end);
}

double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (text == "nan") return std::nan("");
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ValidationError("not a number: '" + std::string(text) + "'");
    }
    return out;
}

namespace {

struct Header {
    std::string kind;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

Header parse_header(const std::string& line, const fs::path& path) {
    std::istringstream in(line);
    std::string hash;
    Header h;
    if (!(in >> hash >> h.kind >> h.rows >> h.cols) || hash != "#" || h.rows < 1 || h.cols < 1) {
        throw ValidationError(path.string() + ": bad header '" + line + "'");
    }
    return h;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    return in;
}

Matrix read_body(std::istream& in, Eigen::Index rows, Eigen::Index cols, const fs::path& path) {
    Matrix m(rows, cols);
    std::string line;
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) {
            throw ValidationError(path.string() + ": expected " + std::to_string(rows) + " rows");
        }
        auto cells = split(line);
        if (static_cast<Eigen::Index>(cells.size()) != cols) {
            throw ValidationError(path.string() + ": row " + std::to_string(i + 1) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(cols));
        }
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = parse_double(cells[static_cast<std::size_t>(j)]);
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line != "\r") throw ValidationError(path.string() + ": trailing rows");
    }
    return m;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
    if (!out) throw ValidationError("write failed for " + path.string());
}

}  // namespace

std::string to_text(const Matrix& m, std::string_view header_kind) {
    std::string s;
    if (!header_kind.empty()) {
        s += "# ";
        s += header_kind;
        s += ' ' + std::to_string(m.rows()) + ' ' + std::to_string(m.cols()) + '\n';
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) s += ',';
            s += format_double(m(i, j));
        }
        s += '\n';
    }
    return s;
}

fs::path mask_path_for(const fs::path& values_path) {
    fs::path p = values_path;
    p.replace_extension(".mask.csv");
    return p;
}

void write_dense(const fs::path& path, const Matrix& m) { write_text(path, to_text(m, "dense")); }

Matrix read_dense(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    Header h = parse_header(line, path);
    if (h.kind != "dense") throw ValidationError(path.string() + ": expected a dense matrix file");
    return read_body(in, h.rows, h.cols, path);
}

void write_masked(const fs::path& path, const MaskedMatrix& m) {
    write_text(path, to_text(m.values(), "masked"));
    std::string mask;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) mask += ',';
            mask += m.mask()(i, j) ? '1' : '0';
        }
        mask += '\n';
    }
    write_text(mask_path_for(path), mask);
}

MaskedMatrix read_masked(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    Header h = parse_header(line, path);
    if (h.kind != "masked") throw ValidationError(path.string() + ": expected a masked matrix file");
    Matrix values = read_body(in, h.rows, h.cols, path);
    auto mask_file = mask_path_for(path);
    auto min = open_in(mask_file);
    Matrix bits = read_body(min, h.rows, h.cols, mask_file);
    Mask mask(h.rows, h.cols);
    for (Eigen::Index i = 0; i < h.rows; ++i) {
        for (Eigen::Index j = 0; j < h.cols; ++j) {
            double b = bits(i, j);
            if (b != 0.0 && b != 1.0) throw ValidationError(mask_file.string() + ": mask entries must be 0 or 1");
            mask(i, j) = b == 1.0;
            if (!mask(i, j) && values(i, j) != 0.0) {
                throw ValidationError(path.string() + ": unobserved cell (" + std::to_string(i + 1) + "," +
                                      std::to_string(j + 1) + ") must be stored as 0");
            }
        }
    }
    return MaskedMatrix(std::move(values), std::move(mask));
}

MaskedMatrix read_any(const fs::path& path) {
    std::string line;
    {
        auto in = open_in(path);
        std::getline(in, line);
    }
    Header h = parse_header(line, path);
    if (h.kind == "masked") return read_masked(path);
    if (h.kind == "dense") return MaskedMatrix::fully_observed(read_dense(path));
    throw ValidationError(path.string() + ": unknown matrix kind '" + h.kind + "'");
}

void write_vector(const fs::path& path, const Vector& v) { write_dense(path, Matrix(v)); }

Vector read_vector(const fs::path& path) {
    Matrix m = read_dense(path);
    if (m.cols() != 1) throw ValidationError(path.string() + ": expected a single column");
    return m.col(0);
}

}  // namespace eivreg::io
