#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lsrecover/types.hpp"

namespace lsr {

enum class MatrixFormat { Csv, Lsmx };

/// LSMX layout: "LSMX", u32 version (1), u32 rows, u32 cols, then rows*cols
/// little-endian f64 in row-major order. All integers little-endian.
inline constexpr std::string_view kLsmxMagic = "LSMX";
inline constexpr std::uint32_t kLsmxVersion = 1;

Matrix parse_csv(std::string_view text);
std::string format_csv(const Matrix& x);
Matrix parse_lsmx(std::string_view bytes);
std::string format_lsmx(const Matrix& x);

/// LSMX when the file starts with the magic or has a .lsmx extension, CSV otherwise.
MatrixFormat detect_format(const std::filesystem::path& path);

/// Throws IoError when the file cannot be read, ParseError on malformed content.
Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& x, MatrixFormat format);

/// Sparse matrices as "i,j,value" lines (0-based indices).
void write_sparse_csv(const std::filesystem::path& path, const SparseMatrix& s);
SparseMatrix read_sparse_csv(const std::filesystem::path& path, Index rows, Index cols);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace lsr
