#include "xray/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace xray {

namespace {

std::string describe(const Triple& t) {
  std::ostringstream os;
  os << "(" << t.row << ", " << t.col << ", " << t.value << ")";
  return os.str();
}

}  // namespace

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Index> col_ptr,
                           std::vector<Index> row_idx,
                           std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      col_ptr_(std::move(col_ptr)),
      row_idx_(std::move(row_idx)),
      values_(std::move(values)) {
  if (rows_ < 0 || cols_ < 0) throw Error("negative matrix dimension");
  if (static_cast<Index>(col_ptr_.size()) != cols_ + 1)
    throw Error("column pointer array must have cols + 1 entries");
  if (row_idx_.size() != values_.size())
    throw Error("row index and value arrays differ in length");
  if (col_ptr_.front() != 0 || col_ptr_.back() != nnz())
    throw Error("column pointers must start at 0 and end at nnz");
  for (Index j = 0; j < cols_; ++j) {
    if (col_ptr_[j + 1] < col_ptr_[j])
      throw Error("column pointers must be non-decreasing");
    for (Index p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      if (row_idx_[p] < 0 || row_idx_[p] >= rows_)
        throw Error("row index out of range in column " + std::to_string(j));
      if (p > col_ptr_[j] && row_idx_[p] <= row_idx_[p - 1])
        throw Error("row indices not strictly increasing in column " +
                    std::to_string(j));
      if (values_[p] == 0.0)
        throw Error("explicit zero stored in column " + std::to_string(j));
    }
  }
}

SparseMatrix SparseMatrix::from_triples(std::span<const Triple> triples,
                                        Index rows, Index cols) {
  if (rows < 0 || cols < 0) throw Error("negative matrix dimension");
  for (const auto& t : triples) {
    if (t.row < 0 || t.row >= rows)
      throw Error("row index out of range: " + describe(t));
    if (t.col < 0 || t.col >= cols)
      throw Error("column index out of range: " + describe(t));
  }

  // Stable ordering keeps duplicate sums in input order.
  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = triples[a];
    const auto& y = triples[b];
    return x.col != y.col ? x.col < y.col : x.row < y.row;
  });

  std::vector<Index> col_ptr(static_cast<std::size_t>(cols) + 1, 0);
  std::vector<Index> row_idx;
  std::vector<double> values;
  row_idx.reserve(triples.size());
  values.reserve(triples.size());

  std::size_t k = 0;
  while (k < order.size()) {
    const Triple& first = triples[order[k]];
    double sum = 0.0;
    std::size_t e = k;
    while (e < order.size() && triples[order[e]].col == first.col &&
           triples[order[e]].row == first.row) {
      sum += triples[order[e]].value;
      ++e;
    }
    if (sum != 0.0) {
      row_idx.push_back(first.row);
      values.push_back(sum);
      ++col_ptr[static_cast<std::size_t>(first.col) + 1];
    }
    k = e;
  }
  std::partial_sum(col_ptr.begin(), col_ptr.end(), col_ptr.begin());
  return SparseMatrix(rows, cols, std::move(col_ptr), std::move(row_idx),
                      std::move(values));
}

SparseMatrix SparseMatrix::from_dense(const Eigen::MatrixXd& dense) {
  std::vector<Index> col_ptr(static_cast<std::size_t>(dense.cols()) + 1, 0);
  std::vector<Index> row_idx;
  std::vector<double> values;
  for (Index j = 0; j < dense.cols(); ++j) {
    for (Index i = 0; i < dense.rows(); ++i) {
      const double v = dense(i, j);
      if (v != 0.0) {
        row_idx.push_back(i);
        values.push_back(v);
      }
    }
    col_ptr[static_cast<std::size_t>(j) + 1] = static_cast<Index>(values.size());
  }
  return SparseMatrix(dense.rows(), dense.cols(), std::move(col_ptr),
                      std::move(row_idx), std::move(values));
}

ColumnView SparseMatrix::column(Index j) const {
  const auto begin = static_cast<std::size_t>(col_ptr_[j]);
  const auto len = static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j]);
  return {std::span<const Index>(row_idx_).subspan(begin, len),
          std::span<const double>(values_).subspan(begin, len)};
}

double SparseMatrix::coeff(Index i, Index j) const {
  const auto col = column(j);
  const auto it = std::lower_bound(col.rows.begin(), col.rows.end(), i);
  if (it == col.rows.end() || *it != i) return 0.0;
  return col.values[static_cast<std::size_t>(it - col.rows.begin())];
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows_, cols_);
  for (Index j = 0; j < cols_; ++j)
    for (Index p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
      out(row_idx_[p], j) = values_[p];
  return out;
}

std::vector<Triple> SparseMatrix::to_triples() const {
  std::vector<Triple> out;
  out.reserve(values_.size());
  for (Index j = 0; j < cols_; ++j)
    for (Index p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
      out.push_back({row_idx_[p], j, values_[p]});
  return out;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Index> ptr(static_cast<std::size_t>(rows_) + 1, 0);
  for (Index r : row_idx_) ++ptr[static_cast<std::size_t>(r) + 1];
  std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
  std::vector<Index> next(ptr.begin(), ptr.end() - 1);
  std::vector<Index> idx(values_.size());
  std::vector<double> val(values_.size());
  // Visiting columns in order keeps the new row indices sorted.
  for (Index j = 0; j < cols_; ++j) {
    for (Index p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      const Index dst = next[static_cast<std::size_t>(row_idx_[p])]++;
      idx[dst] = j;
      val[dst] = values_[p];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(ptr), std::move(idx),
                      std::move(val));
}

SparseMatrix SparseMatrix::select_columns(std::span<const Index> cols) const {
  std::vector<Index> ptr{0};
  std::vector<Index> idx;
  std::vector<double> val;
  for (Index j : cols) {
    if (j < 0 || j >= cols_) throw Error("column index out of range");
    const auto c = column(j);
    idx.insert(idx.end(), c.rows.begin(), c.rows.end());
    val.insert(val.end(), c.values.begin(), c.values.end());
    ptr.push_back(static_cast<Index>(val.size()));
  }
  return SparseMatrix(rows_, static_cast<Index>(cols.size()), std::move(ptr),
                      std::move(idx), std::move(val));
}

bool SparseMatrix::is_nonnegative() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v >= 0.0; });
}

}  // namespace xray
