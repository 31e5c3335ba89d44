#pragma once

#include "xray/gram.hpp"

#include <optional>
#include <span>
#include <vector>

namespace xray {

/// Each column of B is an independent subproblem. A column stops once a full
/// coordinate cycle lowers its objective by at most tol * ||x_j||^2; the solve
/// ends when every column has stopped or after max_cycles passes. The default
/// cap is only a safety net: cyclic descent can need 1e5 passes or more when
/// C(A, A) is singular or nearly so.
struct NnlsSettings {
  double tol = 1e-18;
  int max_cycles = 1000000;

  void validate() const;
};

// Capped settings for the driver, whose projections must finish in bounded
// time even when a poor anchor choice leaves C(A, A) badly conditioned.
inline constexpr NnlsSettings kInLoopNnls{1e-18, 2000};
inline constexpr NnlsSettings kFinalNnls{1e-18, 10000};

// What to do with a coordinate whose quadratic coefficient s_i is zero.
enum class ZeroDiagonal {
  kReject,   // throw Error naming the coordinate
  kZeroRow,  // pin that row of B at zero
};

struct NnlsStats {
  double objective = 0.0;
  int cycles = 0;
  // Objective before the first cycle, then after each cycle (tracked from
  // the exact per-coordinate decreases).
  std::vector<double> history;
};

/// State of the cyclic coordinate-descent solver for
///
///   min_{B >= 0}  frob_sq + sum_j ( b_j^T S b_j - 2 ca_j^T b_j ),
///
/// which is ||X - X_A B||_F^2 when S = C(A, A), CA = C(A, :) and
/// frob_sq = ||X||_F^2. Only Gram-level quantities are stored. The auxiliary
/// U = B^T S is kept transposed (Ut = S B, r x n) so that every column of B
/// owns one contiguous column of Ut and columns can be updated independently.
class NnlsWorkspace {
 public:
  NnlsWorkspace() = default;

  // col_scale(j) is the objective of column j at b_j = 0, i.e. ||x_j||^2; it
  // sets the per-column stopping threshold.
  NnlsWorkspace(Eigen::MatrixXd S, Eigen::MatrixXd CA, double frob_sq,
                Eigen::MatrixXd B, Eigen::VectorXd col_scale,
                ZeroDiagonal policy = ZeroDiagonal::kReject);

  /// Empty cone over the n columns described by C.
  explicit NnlsWorkspace(const GramCache& C);

  /// Builds S and CA from the Gram cache at the given anchors. warm_start,
  /// when present, must be |anchors| x n and non-negative; otherwise B = 0.
  static NnlsWorkspace from_gram(const GramCache& C, std::span<const Index> anchors,
                                 const Eigen::MatrixXd* warm_start = nullptr);

  /// Appends anchor j with a zero row in B.
  void add_anchor(const GramCache& C, Index j);

  /// Recomputes U and runs cycles until the objective settles.
  NnlsStats solve(const NnlsSettings& settings);

  /// One pass over the coordinates i = 0..r-1 for every column. Returns the
  /// exact objective decrease.
  double cycle();

  [[nodiscard]] double objective() const;

  void refresh_u();

  // max |Ut - S B| relative to max(1, max |Ut|).
  [[nodiscard]] double u_drift() const;

  // max over (j, a) of (R^T X_A)(j, a) = CA(a, j) - (S B)(a, j); <= 0 at the optimum.
  [[nodiscard]] double kkt_violation() const;

  [[nodiscard]] Index rank() const { return S_.rows(); }
  [[nodiscard]] Index cols() const { return CA_.cols(); }
  [[nodiscard]] const std::vector<Index>& anchors() const { return anchors_; }
  [[nodiscard]] const Eigen::MatrixXd& S() const { return S_; }
  [[nodiscard]] const Eigen::MatrixXd& CA() const { return CA_; }
  [[nodiscard]] const Eigen::MatrixXd& B() const { return B_; }
  [[nodiscard]] const Eigen::MatrixXd& Ut() const { return Ut_; }
  [[nodiscard]] double frob_sq() const { return frob_sq_; }

 private:
  void check_inputs() const;
  double cycle_column(Index j);

  std::vector<Index> anchors_;
  Eigen::MatrixXd S_;
  Eigen::MatrixXd CA_;
  Eigen::MatrixXd B_;
  Eigen::MatrixXd Ut_;
  Eigen::VectorXd col_scale_;
  double frob_sq_ = 0.0;
  ZeroDiagonal policy_ = ZeroDiagonal::kReject;
};

struct NnlsResult {
  Eigen::MatrixXd B;
  double objective = 0.0;
  int cycles = 0;
  std::vector<double> history;
};

/// Solves min_{B >= 0} ||X - X_A B||_F^2 from the Gram cache alone.
NnlsResult nnls_solve(const GramCache& C, std::span<const Index> anchors,
                      const Eigen::MatrixXd* warm_start,
                      const NnlsSettings& settings = {});

/// Row i of R^T X, unclamped: C(i, :) - B(:, i)^T CA. R is never formed.
Eigen::VectorXd residual_gram_row(const NnlsWorkspace& ws, const GramCache& C, Index i);

/// ||R_k||^2 for every column k, clamped at zero against cancellation.
Eigen::VectorXd residual_norms_sq(const NnlsWorkspace& ws, const GramCache& C);

}  // namespace xray
