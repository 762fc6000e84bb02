#include "microem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace microem {

CsrMatrix::CsrMatrix(int nrows, int ncols)
    : nrows_(nrows), ncols_(ncols), offsets_(static_cast<std::size_t>(nrows) + 1, 0) {
  if (nrows < 0 || ncols < 0) throw std::invalid_argument("negative matrix dimension");
}

CsrMatrix::CsrMatrix(int nrows, int ncols, std::vector<int> offsets, std::vector<int> indices,
                     std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      offsets_(std::move(offsets)),
      indices_(std::move(indices)),
      values_(std::move(values)) {
  if (offsets_.size() != static_cast<std::size_t>(nrows_) + 1 || offsets_.front() != 0 ||
      static_cast<std::size_t>(offsets_.back()) != indices_.size() ||
      indices_.size() != values_.size()) {
    throw std::invalid_argument("inconsistent CSR arrays");
  }
  for (int r = 0; r < nrows_; ++r) {
    if (offsets_[r + 1] < offsets_[r]) throw std::invalid_argument("CSR offsets not monotone");
    for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      if (indices_[k] < 0 || indices_[k] >= ncols_) throw std::invalid_argument("CSR column out of range");
      if (k > offsets_[r] && indices_[k] <= indices_[k - 1]) {
        throw std::invalid_argument("CSR columns not strictly increasing in row " + std::to_string(r));
      }
    }
  }
}

double CsrMatrix::at(int r, int c) const {
  if (r < 0 || r >= nrows_ || c < 0 || c >= ncols_) throw std::out_of_range("CsrMatrix::at");
  const auto first = indices_.begin() + offsets_[r];
  const auto last = indices_.begin() + offsets_[r + 1];
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - indices_.begin())];
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<int> offsets(static_cast<std::size_t>(ncols_) + 1, 0);
  for (int c : indices_) ++offsets[static_cast<std::size_t>(c) + 1];
  for (int c = 0; c < ncols_; ++c) offsets[c + 1] += offsets[c];
  std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
  std::vector<int> indices(indices_.size());
  std::vector<double> values(values_.size());
  for (int r = 0; r < nrows_; ++r) {
    for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      const int dst = cursor[indices_[k]]++;
      indices[dst] = r;
      values[dst] = values_[k];
    }
  }
  return CsrMatrix(ncols_, nrows_, std::move(offsets), std::move(indices), std::move(values));
}

CsrMatrix assemble_csr(std::span<const Triplet> triplets, int nrows, int ncols) {
  if (nrows < 0 || ncols < 0) throw std::invalid_argument("negative matrix dimension");
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols) {
      throw std::invalid_argument("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                                  ") outside " + std::to_string(nrows) + "x" + std::to_string(ncols));
    }
  }
  std::vector<Triplet> sorted(triplets.begin(), triplets.end());
  std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.value < b.value;
  });

  std::vector<int> offsets(static_cast<std::size_t>(nrows) + 1, 0);
  std::vector<int> indices;
  std::vector<double> values;
  indices.reserve(sorted.size());
  values.reserve(sorted.size());
  for (std::size_t k = 0; k < sorted.size();) {
    const int r = sorted[k].row;
    const int c = sorted[k].col;
    double sum = 0.0;
    for (; k < sorted.size() && sorted[k].row == r && sorted[k].col == c; ++k) sum += sorted[k].value;
    indices.push_back(c);
    values.push_back(sum);
    ++offsets[static_cast<std::size_t>(r) + 1];
  }
  for (int r = 0; r < nrows; ++r) offsets[r + 1] += offsets[r];
  return CsrMatrix(nrows, ncols, std::move(offsets), std::move(indices), std::move(values));
}

void spmv_into(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != static_cast<std::size_t>(a.cols()) || y.size() != static_cast<std::size_t>(a.rows())) {
    throw std::invalid_argument("spmv dimension mismatch: matrix " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ", x " + std::to_string(x.size()));
  }
  const auto& off = a.offsets();
  const auto& idx = a.indices();
  const auto& val = a.values();
  for (int r = 0; r < a.rows(); ++r) {
    double sum = 0.0;
    for (int k = off[r]; k < off[r + 1]; ++k) sum += val[k] * x[static_cast<std::size_t>(idx[k])];
    y[static_cast<std::size_t>(r)] = sum;
  }
}

Vector spmv(const CsrMatrix& a, std::span<const double> x) {
  Vector y(static_cast<std::size_t>(a.rows()), 0.0);
  spmv_into(a, x, y);
  return y;
}

CsrMatrix linear_combination(std::initializer_list<std::pair<double, const CsrMatrix*>> terms) {
  if (terms.size() == 0) throw std::invalid_argument("linear_combination needs at least one term");
  const CsrMatrix& first = *terms.begin()->second;
  bool shared_pattern = true;
  for (const auto& [alpha, m] : terms) {
    if (m->rows() != first.rows() || m->cols() != first.cols()) {
      throw std::invalid_argument("linear_combination shape mismatch");
    }
    shared_pattern = shared_pattern && m->same_pattern(first);
  }

  if (shared_pattern) {
    std::vector<double> values(first.nnz(), 0.0);
    for (const auto& [alpha, m] : terms) {
      const auto& v = m->values();
      for (std::size_t k = 0; k < values.size(); ++k) values[k] += alpha * v[k];
    }
    return CsrMatrix(first.rows(), first.cols(), first.offsets(), first.indices(), std::move(values));
  }

  std::vector<Triplet> triplets;
  for (const auto& [alpha, m] : terms) {
    for (int r = 0; r < m->rows(); ++r) {
      for (int k = m->offsets()[r]; k < m->offsets()[r + 1]; ++k) {
        triplets.push_back({r, m->indices()[k], alpha * m->values()[k]});
      }
    }
  }
  return assemble_csr(triplets, first.rows(), first.cols());
}

CsrMatrix block_compose(const BlockGrid& blocks) {
  const std::size_t brows = blocks.size();
  if (brows == 0) throw std::invalid_argument("block_compose: empty grid");
  const std::size_t bcols = blocks.front().size();
  for (const auto& row : blocks) {
    if (row.size() != bcols) throw std::invalid_argument("block_compose: ragged block grid");
  }

  std::vector<int> heights(brows, -1);
  std::vector<int> widths(bcols, -1);
  for (std::size_t i = 0; i < brows; ++i) {
    for (std::size_t j = 0; j < bcols; ++j) {
      const CsrMatrix* b = blocks[i][j];
      if (b == nullptr) continue;
      if (heights[i] >= 0 && heights[i] != b->rows()) {
        throw std::invalid_argument("block_compose: inconsistent heights in block row " + std::to_string(i));
      }
      if (widths[j] >= 0 && widths[j] != b->cols()) {
        throw std::invalid_argument("block_compose: inconsistent widths in block column " + std::to_string(j));
      }
      heights[i] = b->rows();
      widths[j] = b->cols();
    }
  }
  for (std::size_t i = 0; i < brows; ++i) {
    if (heights[i] < 0) throw std::invalid_argument("block_compose: block row " + std::to_string(i) + " is empty");
  }
  for (std::size_t j = 0; j < bcols; ++j) {
    if (widths[j] < 0) throw std::invalid_argument("block_compose: block column " + std::to_string(j) + " is empty");
  }

  std::vector<int> col_offset(bcols + 1, 0);
  for (std::size_t j = 0; j < bcols; ++j) col_offset[j + 1] = col_offset[j] + widths[j];
  int total_rows = 0;
  for (int h : heights) total_rows += h;

  std::size_t nnz = 0;
  for (const auto& row : blocks) {
    for (const CsrMatrix* b : row) nnz += b ? b->nnz() : 0;
  }

  std::vector<int> offsets;
  std::vector<int> indices;
  std::vector<double> values;
  offsets.reserve(static_cast<std::size_t>(total_rows) + 1);
  indices.reserve(nnz);
  values.reserve(nnz);
  offsets.push_back(0);
  for (std::size_t i = 0; i < brows; ++i) {
    for (int r = 0; r < heights[i]; ++r) {
      // Blocks are visited left to right, so columns stay sorted.
      for (std::size_t j = 0; j < bcols; ++j) {
        const CsrMatrix* b = blocks[i][j];
        if (b == nullptr) continue;
        for (int k = b->offsets()[r]; k < b->offsets()[r + 1]; ++k) {
          indices.push_back(b->indices()[k] + col_offset[j]);
          values.push_back(b->values()[k]);
        }
      }
      offsets.push_back(static_cast<int>(indices.size()));
    }
  }
  return CsrMatrix(total_rows, col_offset.back(), std::move(offsets), std::move(indices), std::move(values));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace microem
