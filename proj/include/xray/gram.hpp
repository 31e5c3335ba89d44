#pragma once

#include "xray/sparse.hpp"

#include <span>

namespace xray {

/// The one-time products of the data matrix X (m x n): the Gram matrix
/// C = X^T X, signed column sums p^T x_j with p = 1, squared column norms and
/// ||X||_F^2. C is kept sparse (CSC) below the density threshold and dense
/// otherwise. Every entry C(k, j) is the inner product of columns k and j
/// accumulated in increasing row order, so C is bitwise symmetric and does
/// not depend on the worker count.
class GramCache {
 public:
  static constexpr double kDefaultDenseThreshold = 0.25;

  GramCache() = default;

  [[nodiscard]] Index size() const { return n_; }
  [[nodiscard]] bool is_dense() const { return dense_mode_; }
  [[nodiscard]] Index nnz() const { return nnz_; }
  [[nodiscard]] double density() const;

  [[nodiscard]] const SparseMatrix& sparse() const { return sparse_; }
  [[nodiscard]] const Eigen::MatrixXd& dense() const { return dense_; }

  [[nodiscard]] double coeff(Index i, Index j) const {
    return dense_mode_ ? dense_(i, j) : sparse_.coeff(i, j);
  }

  // Calls f(k, C(k, j)) for every structurally non-zero entry of column j,
  // in increasing k. Dense storage visits all n entries.
  template <class F>
  void for_each_in_column(Index j, F&& f) const {
    if (dense_mode_) {
      const double* col = dense_.col(j).data();
      for (Index k = 0; k < n_; ++k) f(k, col[k]);
    } else {
      const auto c = sparse_.column(j);
      for (std::size_t p = 0; p < c.size(); ++p) f(c.rows[p], c.values[p]);
    }
  }

  // Column j of C, densified.
  [[nodiscard]] Eigen::VectorXd column(Index j) const;

  [[nodiscard]] const Eigen::VectorXd& col_l1() const { return col_l1_; }
  [[nodiscard]] const Eigen::VectorXd& col_l2sq() const { return col_l2sq_; }
  [[nodiscard]] double frob_sq() const { return frob_sq_; }

  // True when X has no negative entries, which makes every entry of C and of
  // C_A H non-negative.
  [[nodiscard]] bool data_nonnegative() const { return nonnegative_; }

  friend GramCache gram(const SparseMatrix& X, double dense_threshold);

 private:
  Index n_ = 0;
  Index nnz_ = 0;
  bool dense_mode_ = false;
  bool nonnegative_ = true;
  SparseMatrix sparse_;
  Eigen::MatrixXd dense_;
  Eigen::VectorXd col_l1_;
  Eigen::VectorXd col_l2sq_;
  double frob_sq_ = 0.0;
};

GramCache gram(const SparseMatrix& X,
               double dense_threshold = GramCache::kDefaultDenseThreshold);

/// Rows C(indices[i], :) stacked in order, as a dense |indices| x n matrix.
Eigen::MatrixXd gram_rows(const GramCache& C, std::span<const Index> indices);

}  // namespace xray
