#pragma once

#include "xray/detection.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace xray {

struct XrayConfig {
  Index rank = 1;
  SelectionCriterion criterion;
  NnlsSettings loop_nnls = kInLoopNnls;
  NnlsSettings final_nnls = kFinalNnls;
  double early_stop_tol = 1e-10;
  int refine_iters = 0;
  // Stop once adding an anchor improves the residual by less than this
  // fraction of the previous residual.
  std::optional<double> improvement_threshold;

  void validate() const;
};

struct RefineResult {
  Eigen::MatrixXd W;  // m x r, non-negative
  Eigen::MatrixXd H;  // r x n, non-negative
  std::vector<double> history;  // ||X - WH||_F^2 at the start and after each sweep
};

struct XrayResult {
  std::vector<Index> anchors;  // in selection order
  Eigen::MatrixXd H;           // |anchors| x n
  std::vector<double> residual_history;  // ||X - X_A H||_F^2 after each iteration
  std::vector<DetectionReport> reports;
  bool stopped_early = false;
  std::optional<RefineResult> refined;
};

using StepCallback =
    std::function<void(const NnlsWorkspace&, const GramCache&, const DetectionReport&)>;

struct IterationObserver {
  // After detection, before the chosen column joins the cone; the workspace
  // still holds the previous projection.
  StepCallback on_detection;
  // After the projection that includes the new anchor.
  StepCallback on_projection;
};

/// True once the remaining residual mass is at most early_stop_tol * frob_sq
/// or no column is exterior to the current cone.
bool early_stop_check(const Eigen::VectorXd& res_norms_sq, double frob_sq,
                      double early_stop_tol);

/// Alternates detection and projection until `config.rank` anchors are
/// selected, the cone covers the data, or the improvement threshold trips.
/// Refinement (config.refine_iters > 0) needs X and is only run by the
/// SparseMatrix overload.
XrayResult xray_run(const GramCache& C, const XrayConfig& config,
                    const IterationObserver& observer = {});
XrayResult xray_run(const SparseMatrix& X, const XrayConfig& config,
                    const IterationObserver& observer = {});

/// Alternating non-negative least squares on ||X - WH||_F^2 starting from
/// W = max(X_A, 0), which is X_A itself for non-negative data. Each half-step is solved exactly enough by the coordinate solver;
/// a coordinate whose Gram diagonal is zero is held at 0.
RefineResult refine(const SparseMatrix& X, std::span<const Index> anchors,
                    const Eigen::MatrixXd& H, int iters,
                    const NnlsSettings& settings = kFinalNnls);

/// Incremental selection with the improvement threshold taken from config,
/// capped at rank_max anchors.
XrayResult model_select(const SparseMatrix& X, XrayConfig config, Index rank_max);

}  // namespace xray
