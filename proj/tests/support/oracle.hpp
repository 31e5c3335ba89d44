#pragma once

// Reference computations done the slow way on dense X. Nothing here goes
// through the Gram cache or the coordinate solver.

#include "xray/xray.hpp"

#include <Eigen/Dense>

#include <limits>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using xray::Index;

inline MatrixXd anchor_cols(const MatrixXd& X, std::span<const Index> anchors) {
  MatrixXd XA(X.rows(), static_cast<Index>(anchors.size()));
  for (std::size_t a = 0; a < anchors.size(); ++a) XA.col(static_cast<Index>(a)) = X.col(anchors[a]);
  return XA;
}

inline MatrixXd residual(const MatrixXd& X, std::span<const Index> anchors, const MatrixXd& H) {
  if (anchors.empty()) return X;
  return X - anchor_cols(X, anchors) * H;
}

inline double objective(const MatrixXd& X, std::span<const Index> anchors, const MatrixXd& H) {
  return residual(X, anchors, H).squaredNorm();
}

struct ColumnOptimum {
  VectorXd b;
  double objective = std::numeric_limits<double>::infinity();
};

// min_{b >= 0} ||x - A b||^2 by trying every support set and keeping the best
// feasible unconstrained solution. Exponential in cols(A); fine for r <= 6.
inline ColumnOptimum exhaustive_nnls(const MatrixXd& A, const VectorXd& x) {
  const Index r = A.cols();
  ColumnOptimum best;
  best.b = VectorXd::Zero(r);
  best.objective = x.squaredNorm();
  for (unsigned mask = 1; mask < (1u << r); ++mask) {
    std::vector<Index> support;
    for (Index i = 0; i < r; ++i)
      if (mask & (1u << i)) support.push_back(i);
    MatrixXd AP(A.rows(), static_cast<Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) AP.col(static_cast<Index>(k)) = A.col(support[k]);
    const VectorXd bp = AP.colPivHouseholderQr().solve(x);
    if ((bp.array() < 0.0).any()) continue;
    const double obj = (x - AP * bp).squaredNorm();
    if (obj < best.objective) {
      best.objective = obj;
      best.b.setZero();
      for (std::size_t k = 0; k < support.size(); ++k) best.b(support[k]) = bp(static_cast<Index>(k));
    }
  }
  return best;
}

inline double exhaustive_objective(const MatrixXd& X, std::span<const Index> anchors) {
  const MatrixXd XA = anchor_cols(X, anchors);
  double total = 0.0;
  for (Index j = 0; j < X.cols(); ++j) total += exhaustive_nnls(XA, X.col(j)).objective;
  return total;
}

inline MatrixXd random_dense(Index m, Index n, double density, bool mixed_sign, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd X = MatrixXd::Zero(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i)
      if (u(rng) < density) X(i, j) = mixed_sign ? 2.0 * u(rng) - 1.0 : u(rng);
  return X;
}

}  // namespace oracle
