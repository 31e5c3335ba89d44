#include "xray/gram.hpp"

#include <omp.h>

#include <algorithm>
#include <numeric>

namespace xray {

double GramCache::density() const {
  if (n_ == 0) return 0.0;
  return static_cast<double>(nnz_) / (static_cast<double>(n_) * static_cast<double>(n_));
}

Eigen::VectorXd GramCache::column(Index j) const {
  if (dense_mode_) return dense_.col(j);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
  for_each_in_column(j, [&](Index k, double v) { out[k] = v; });
  return out;
}

GramCache gram(const SparseMatrix& X, double dense_threshold) {
  const Index n = X.cols();
  const SparseMatrix rows_of_x = X.transpose();

  // Each output column is owned by one worker: C(:, j) = sum over the rows i
  // touched by x_j of x_ij * X(i, :), visiting i in increasing order.
  std::vector<std::vector<Index>> col_rows(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> col_vals(static_cast<std::size_t>(n));

#pragma omp parallel
  {
    std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Index> touched;
#pragma omp for schedule(dynamic, 16)
    for (Index j = 0; j < n; ++j) {
      touched.clear();
      const auto xj = X.column(j);
      for (std::size_t p = 0; p < xj.size(); ++p) {
        const double xij = xj.values[p];
        const auto row = rows_of_x.column(xj.rows[p]);
        for (std::size_t q = 0; q < row.size(); ++q) {
          const auto k = static_cast<std::size_t>(row.rows[q]);
          if (!seen[k]) {
            seen[k] = 1;
            touched.push_back(row.rows[q]);
          }
          acc[k] += xij * row.values[q];
        }
      }
      std::sort(touched.begin(), touched.end());
      auto& rows = col_rows[static_cast<std::size_t>(j)];
      auto& vals = col_vals[static_cast<std::size_t>(j)];
      for (Index k : touched) {
        const auto kk = static_cast<std::size_t>(k);
        if (acc[kk] != 0.0) {
          rows.push_back(k);
          vals.push_back(acc[kk]);
        }
        acc[kk] = 0.0;
        seen[kk] = 0;
      }
    }
  }

  std::vector<Index> ptr(static_cast<std::size_t>(n) + 1, 0);
  for (Index j = 0; j < n; ++j)
    ptr[static_cast<std::size_t>(j) + 1] =
        ptr[static_cast<std::size_t>(j)] +
        static_cast<Index>(col_rows[static_cast<std::size_t>(j)].size());
  std::vector<Index> idx;
  std::vector<double> val;
  idx.reserve(static_cast<std::size_t>(ptr.back()));
  val.reserve(static_cast<std::size_t>(ptr.back()));
  for (Index j = 0; j < n; ++j) {
    auto& r = col_rows[static_cast<std::size_t>(j)];
    auto& v = col_vals[static_cast<std::size_t>(j)];
    idx.insert(idx.end(), r.begin(), r.end());
    val.insert(val.end(), v.begin(), v.end());
    std::vector<Index>().swap(r);
    std::vector<double>().swap(v);
  }

  GramCache out;
  out.n_ = n;
  out.nonnegative_ = X.is_nonnegative();
  out.sparse_ = SparseMatrix(n, n, std::move(ptr), std::move(idx), std::move(val));
  out.nnz_ = out.sparse_.nnz();

  out.col_l1_ = Eigen::VectorXd::Zero(n);
  out.col_l2sq_ = Eigen::VectorXd::Zero(n);
  for (Index j = 0; j < n; ++j) {
    const auto xj = X.column(j);
    double s = 0.0;
    for (double v : xj.values) s += v;
    out.col_l1_[j] = s;
    out.col_l2sq_[j] = out.sparse_.coeff(j, j);
  }
  out.frob_sq_ = 0.0;
  for (Index j = 0; j < n; ++j) out.frob_sq_ += out.col_l2sq_[j];

  if (n > 0 && out.density() >= dense_threshold) {
    out.dense_ = out.sparse_.to_dense();
    out.sparse_ = SparseMatrix();
    out.dense_mode_ = true;
  }
  return out;
}

Eigen::MatrixXd gram_rows(const GramCache& C, std::span<const Index> indices) {
  const Index n = C.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Index>(indices.size()), n);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Index a = indices[i];
    if (a < 0 || a >= n) throw Error("gram row index out of range: " + std::to_string(a));
    // C is symmetric, so row a is column a.
    C.for_each_in_column(a, [&](Index k, double v) { out(static_cast<Index>(i), k) = v; });
  }
  return out;
}

}  // namespace xray
