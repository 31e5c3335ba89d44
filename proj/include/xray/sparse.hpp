#pragma once

#include "xray/common.hpp"

#include <span>
#include <vector>

namespace xray {

// One coordinate-format entry.
struct Triple {
  Index row = 0;
  Index col = 0;
  double value = 0.0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

// Read-only view of one stored column.
struct ColumnView {
  std::span<const Index> rows;
  std::span<const double> values;

  [[nodiscard]] std::size_t size() const { return rows.size(); }
};

/// Compressed sparse-column matrix of doubles in canonical form: row indices
/// strictly increasing inside each column, no explicitly stored zeros.
/// Immutable once built and safe to share between threads.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Takes ownership of raw CSC arrays and validates the canonical-form
  /// invariants, throwing Error when any of them is violated.
  SparseMatrix(Index rows, Index cols, std::vector<Index> col_ptr,
               std::vector<Index> row_idx, std::vector<double> values);

  /// Builds from coordinate triples. Duplicate (row, col) entries are summed
  /// and sums equal to exactly zero are dropped.
  static SparseMatrix from_triples(std::span<const Triple> triples, Index rows,
                                   Index cols);

  /// Stores every non-zero entry of a dense matrix.
  static SparseMatrix from_dense(const Eigen::MatrixXd& dense);

  [[nodiscard]] Index rows() const { return rows_; }
  [[nodiscard]] Index cols() const { return cols_; }
  [[nodiscard]] Index nnz() const { return static_cast<Index>(values_.size()); }

  [[nodiscard]] std::span<const Index> col_ptr() const { return col_ptr_; }
  [[nodiscard]] std::span<const Index> row_indices() const { return row_idx_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }

  [[nodiscard]] ColumnView column(Index j) const;

  // Stored value at (i, j), zero when absent. Binary search in column j.
  [[nodiscard]] double coeff(Index i, Index j) const;

  [[nodiscard]] Eigen::MatrixXd to_dense() const;
  [[nodiscard]] std::vector<Triple> to_triples() const;
  [[nodiscard]] SparseMatrix transpose() const;

  // Keeps only the listed columns, in the given order.
  [[nodiscard]] SparseMatrix select_columns(std::span<const Index> cols) const;

  [[nodiscard]] bool is_nonnegative() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> col_ptr_{0};
  std::vector<Index> row_idx_;
  std::vector<double> values_;
};

inline SparseMatrix build_sparse(std::span<const Triple> triples, Index rows,
                                 Index cols) {
  return SparseMatrix::from_triples(triples, rows, cols);
}

}  // namespace xray
