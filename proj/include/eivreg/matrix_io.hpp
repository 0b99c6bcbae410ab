#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "eivreg/linalg.hpp"

namespace eivreg::io {

/// Shortest decimal that parses back to the same double, locale independent.
std::string format_double(double x);
/// Strict locale-independent parse; throws ValidationError on trailing junk.
double parse_double(std::string_view text);

// Dense files:  "# dense N p" then N rows of p comma-separated values.
// Masked files: "# masked N p" values file plus "<stem>.mask.csv" of 0/1 rows.
// Unobserved cells in the values file are written as 0.

void write_dense(const std::filesystem::path& path, const Matrix& m);
Matrix read_dense(const std::filesystem::path& path);

void write_masked(const std::filesystem::path& path, const MaskedMatrix& m);
MaskedMatrix read_masked(const std::filesystem::path& path);

/// Reads either format, returning a fully observed matrix for dense files.
MaskedMatrix read_any(const std::filesystem::path& path);

/// Vectors are stored as dense N x 1 matrices.
void write_vector(const std::filesystem::path& path, const Vector& v);
Vector read_vector(const std::filesystem::path& path);

/// "z.csv" -> "z.mask.csv"
std::filesystem::path mask_path_for(const std::filesystem::path& values_path);

std::string to_text(const Matrix& m, std::string_view header_kind);

}  // namespace eivreg::io
