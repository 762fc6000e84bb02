#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace microem {

using Vector = std::vector<double>;

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix. Column indices are strictly increasing within
/// each row, so (row, col) pairs are unique.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(int nrows, int ncols);  // all-zero matrix
  CsrMatrix(int nrows, int ncols, std::vector<int> offsets, std::vector<int> indices,
            std::vector<double> values);

  int rows() const { return nrows_; }
  int cols() const { return ncols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<int>& offsets() const { return offsets_; }
  const std::vector<int>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Stored value at (r, c), or 0 when the entry is structurally absent.
  double at(int r, int c) const;

  bool same_pattern(const CsrMatrix& other) const {
    return nrows_ == other.nrows_ && ncols_ == other.ncols_ && offsets_ == other.offsets_ &&
           indices_ == other.indices_;
  }

  CsrMatrix transpose() const;

 private:
  int nrows_ = 0;
  int ncols_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> indices_;
  std::vector<double> values_;
};

/// Sums duplicate entries. Triplets are sorted by (row, col, value) before
/// summation, so any permutation of the same triplets yields bitwise
/// identical arrays. Throws std::invalid_argument on out-of-range indices.
CsrMatrix assemble_csr(std::span<const Triplet> triplets, int nrows, int ncols);

Vector spmv(const CsrMatrix& a, std::span<const double> x);
void spmv_into(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

/// sum_k alpha_k * A_k over matrices of equal shape; the pattern is the union.
CsrMatrix linear_combination(std::initializer_list<std::pair<double, const CsrMatrix*>> terms);

/// Row-major grid of blocks; nullptr marks an absent (zero) block. Every block
/// row and block column needs at least one present block to fix its size.
using BlockGrid = std::vector<std::vector<const CsrMatrix*>>;
CsrMatrix block_compose(const BlockGrid& blocks);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

}  // namespace microem
