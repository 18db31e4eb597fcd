#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lsr {

/// Dense m x n real matrix with row-major storage. vec(X) is the row-major
/// flattening, so linear index k corresponds to (k / n, k % n).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Index = Eigen::Index;

inline Eigen::Map<const Vector> vec(const Matrix& x) { return {x.data(), x.size()}; }
inline Eigen::Map<Vector> vec(Matrix& x) { return {x.data(), x.size()}; }

/// Thrown when a caller violates an operation's preconditions.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The incoherence cap is not below the closedness margin sqrt(mn)/(r sqrt(s)).
class OutOfRegime : public std::domain_error {
public:
    OutOfRegime(const std::string& what, double mu_max)
        : std::domain_error(what), mu_max_(mu_max) {}
    double mu_max() const noexcept { return mu_max_; }

private:
    double mu_max_;
};

/// A normalized step size has a zero denominator with a nonzero numerator.
class DegenerateStep : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed matrix file. offset is the byte position where parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SparseEntry {
    Index row = 0;
    Index col = 0;
    double value = 0.0;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sorted list of (i, j) positions; order is row-major linear index.
class SupportSet {
public:
    SupportSet() = default;
    SupportSet(Index rows, Index cols, std::vector<Index> linear);

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return linear_.size(); }
    bool empty() const noexcept { return linear_.empty(); }
    const std::vector<Index>& linear() const noexcept { return linear_; }
    bool contains(Index i, Index j) const;

    /// Entries of x outside the support set to zero.
    Matrix mask(const Matrix& x) const;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Index> linear_;
};

/// Sparse matrix stored as (i, j, value) triples sorted by linear index.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols) {}
    SparseMatrix(Index rows, Index cols, std::vector<SparseEntry> entries);

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return entries_.size(); }
    const std::vector<SparseEntry>& entries() const noexcept { return entries_; }

    Matrix to_dense() const;
    /// Adds the stored entries into x in place.
    void add_to(Matrix& x) const;
    SupportSet support() const;
    double frobenius_norm() const;
    double l1_norm() const;

    static SparseMatrix from_dense(const Matrix& x);

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<SparseEntry> entries_;
};

double frobenius_inner(const Matrix& a, const Matrix& b);
double frobenius_inner(const Matrix& a, const SparseMatrix& b);

}  // namespace lsr
