#include "lsrecover/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace lsr {

namespace {

static_assert(std::endian::native == std::endian::little, "LSMX I/O assumes a little-endian host");

constexpr std::size_t kLsmxHeader = 16;

std::uint32_t load_u32(std::string_view bytes, std::size_t at) {
    std::uint32_t v;
    std::memcpy(&v, bytes.data() + at, sizeof v);
    return v;
}

void append_u32(std::string& out, std::uint32_t v) {
    char buf[sizeof v];
    std::memcpy(buf, &v, sizeof v);
    out.append(buf, sizeof v);
}

std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

double parse_number(std::string_view field, std::size_t offset) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
        field.remove_prefix(1);
        ++offset;
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
        field.remove_suffix(1);
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
        ++offset;
    }
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ParseError("CSV: malformed number '" + std::string(field) + "'", offset);
    if (!std::isfinite(v)) throw ParseError("CSV: non-finite value", offset);
    return v;
}

}  // namespace

Matrix parse_csv(std::string_view text) {
    std::vector<double> values;
    Index rows = 0, cols = -1;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        const std::size_t line_start = pos;
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        Index count = 0;
        std::size_t field_start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', field_start);
            const std::size_t field_end = comma == std::string_view::npos ? line.size() : comma;
            values.push_back(parse_number(line.substr(field_start, field_end - field_start),
                                          line_start + field_start));
            ++count;
            if (comma == std::string_view::npos) break;
            field_start = comma + 1;
        }
        if (cols < 0) cols = count;
        else if (count != cols)
            throw ParseError("CSV: row " + std::to_string(rows) + " has " + std::to_string(count) +
                                 " fields, expected " + std::to_string(cols),
                             line_start);
        ++rows;
    }
    if (rows == 0) throw ParseError("CSV: no data rows", 0);
    Matrix x(rows, cols);
    std::copy(values.begin(), values.end(), x.data());
    return x;
}

std::string format_csv(const Matrix& x) {
    std::string out;
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) {
            if (j > 0) out += ',';
            out += format_number(x(i, j));
        }
        out += '\n';
    }
    return out;
}

Matrix parse_lsmx(std::string_view bytes) {
    if (bytes.size() < 4) throw ParseError("LSMX: truncated magic", bytes.size());
    for (std::size_t k = 0; k < 4; ++k)
        if (bytes[k] != kLsmxMagic[k]) throw ParseError("LSMX: bad magic bytes", k);
    if (bytes.size() < kLsmxHeader) throw ParseError("LSMX: truncated header", bytes.size());
    const std::uint32_t version = load_u32(bytes, 4);
    if (version != kLsmxVersion)
        throw ParseError("LSMX: unsupported version " + std::to_string(version), 4);
    const std::uint32_t rows = load_u32(bytes, 8), cols = load_u32(bytes, 12);
    if (rows == 0) throw ParseError("LSMX: zero rows", 8);
    if (cols == 0) throw ParseError("LSMX: zero columns", 12);
    const std::size_t count = static_cast<std::size_t>(rows) * cols;
    const std::size_t expected = kLsmxHeader + count * sizeof(double);
    if (bytes.size() != expected)
        throw ParseError("LSMX: payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                             std::to_string(expected),
                         std::min(bytes.size(), expected));
    Matrix x(rows, cols);
    std::memcpy(x.data(), bytes.data() + kLsmxHeader, count * sizeof(double));
    for (std::size_t k = 0; k < count; ++k)
        if (!std::isfinite(x.data()[k])) throw ParseError("LSMX: non-finite value", kLsmxHeader + k * sizeof(double));
    return x;
}

std::string format_lsmx(const Matrix& x) {
    std::string out(kLsmxMagic);
    append_u32(out, kLsmxVersion);
    append_u32(out, static_cast<std::uint32_t>(x.rows()));
    append_u32(out, static_cast<std::uint32_t>(x.cols()));
    out.append(reinterpret_cast<const char*>(x.data()), static_cast<std::size_t>(x.size()) * sizeof(double));
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

MatrixFormat detect_format(const std::filesystem::path& path) {
    if (path.extension() == ".lsmx") return MatrixFormat::Lsmx;
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    if (in.read(magic, 4) && std::string_view(magic, 4) == kLsmxMagic) return MatrixFormat::Lsmx;
    return MatrixFormat::Csv;
}

Matrix read_matrix(const std::filesystem::path& path) {
    const MatrixFormat format = detect_format(path);
    const std::string contents = read_file(path);
    return format == MatrixFormat::Lsmx ? parse_lsmx(contents) : parse_csv(contents);
}

void write_matrix(const std::filesystem::path& path, const Matrix& x, MatrixFormat format) {
    write_file(path, format == MatrixFormat::Lsmx ? format_lsmx(x) : format_csv(x));
}

void write_sparse_csv(const std::filesystem::path& path, const SparseMatrix& s) {
    std::string out;
    for (const auto& e : s.entries())
        out += std::to_string(e.row) + ',' + std::to_string(e.col) + ',' + format_number(e.value) + '\n';
    write_file(path, out);
}

SparseMatrix read_sparse_csv(const std::filesystem::path& path, Index rows, Index cols) {
    const std::string text = read_file(path);
    std::vector<SparseEntry> entries;
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
        const Matrix triples = parse_csv(text);
        if (triples.cols() != 3) throw ParseError("sparse CSV: expected 3 fields per line", 0);
        for (Index k = 0; k < triples.rows(); ++k) {
            const double i = triples(k, 0), j = triples(k, 1);
            if (i != std::floor(i) || j != std::floor(j))
                throw ParseError("sparse CSV: non-integer index on line " + std::to_string(k + 1), 0);
            entries.push_back({static_cast<Index>(i), static_cast<Index>(j), triples(k, 2)});
        }
    }
    return {rows, cols, std::move(entries)};
}

}  // namespace lsr
