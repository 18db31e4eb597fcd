#include "lsrecover/types.hpp"

#include <algorithm>
#include <cmath>

namespace lsr {

SupportSet::SupportSet(Index rows, Index cols, std::vector<Index> linear)
    : rows_(rows), cols_(cols), linear_(std::move(linear)) {
    std::sort(linear_.begin(), linear_.end());
    if (std::adjacent_find(linear_.begin(), linear_.end()) != linear_.end())
        throw InvalidInput("SupportSet: duplicate index");
    if (!linear_.empty() && (linear_.front() < 0 || linear_.back() >= rows * cols))
        throw InvalidInput("SupportSet: index out of range");
}

bool SupportSet::contains(Index i, Index j) const {
    return std::binary_search(linear_.begin(), linear_.end(), i * cols_ + j);
}

Matrix SupportSet::mask(const Matrix& x) const {
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    const double* src = x.data();
    double* dst = out.data();
    for (Index k : linear_) dst[k] = src[k];
    return out;
}

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<SparseEntry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    auto key = [cols](const SparseEntry& e) { return e.row * cols + e.col; };
    std::sort(entries_.begin(), entries_.end(),
              [&](const SparseEntry& a, const SparseEntry& b) { return key(a) < key(b); });
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        const auto& e = entries_[k];
        if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
            throw InvalidInput("SparseMatrix: entry out of range");
        if (k > 0 && key(entries_[k - 1]) == key(e))
            throw InvalidInput("SparseMatrix: duplicate entry");
    }
}

Matrix SparseMatrix::to_dense() const {
    Matrix x = Matrix::Zero(rows_, cols_);
    add_to(x);
    return x;
}

void SparseMatrix::add_to(Matrix& x) const {
    for (const auto& e : entries_) x(e.row, e.col) += e.value;
}

SupportSet SparseMatrix::support() const {
    std::vector<Index> linear;
    linear.reserve(entries_.size());
    for (const auto& e : entries_)
        if (e.value != 0.0) linear.push_back(e.row * cols_ + e.col);
    return {rows_, cols_, std::move(linear)};
}

double SparseMatrix::frobenius_norm() const {
    double sum = 0.0;
    for (const auto& e : entries_) sum += e.value * e.value;
    return std::sqrt(sum);
}

double SparseMatrix::l1_norm() const {
    double sum = 0.0;
    for (const auto& e : entries_) sum += std::abs(e.value);
    return sum;
}

SparseMatrix SparseMatrix::from_dense(const Matrix& x) {
    std::vector<SparseEntry> entries;
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.cols(); ++j)
            if (x(i, j) != 0.0) entries.push_back({i, j, x(i, j)});
    return {x.rows(), x.cols(), std::move(entries)};
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InvalidInput("frobenius_inner: shape mismatch");
    return vec(a).dot(vec(b));
}

double frobenius_inner(const Matrix& a, const SparseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InvalidInput("frobenius_inner: shape mismatch");
    double sum = 0.0;
    for (const auto& e : b.entries()) sum += a(e.row, e.col) * e.value;
    return sum;
}

}  // namespace lsr
