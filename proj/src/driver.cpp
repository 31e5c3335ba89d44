#include "xray/driver.hpp"

#include <cmath>
#include <string>

namespace xray {

void XrayConfig::validate() const {
  if (rank < 1) throw Error("rank must be >= 1");
  loop_nnls.validate();
  final_nnls.validate();
  if (!(early_stop_tol >= 0.0)) throw Error("early_stop_tol must be >= 0");
  if (refine_iters < 0) throw Error("refine_iters must be >= 0");
  if (improvement_threshold && !(*improvement_threshold >= 0.0))
    throw Error("improvement_threshold must be >= 0");
}

bool early_stop_check(const Eigen::VectorXd& res_norms_sq, double frob_sq,
                      double early_stop_tol) {
  if (res_norms_sq.sum() <= early_stop_tol * frob_sq) return true;
  const Mask exterior = exterior_points(res_norms_sq, frob_sq);
  for (char e : exterior)
    if (e) return false;
  return true;
}

XrayResult xray_run(const GramCache& C, const XrayConfig& config,
                    const IterationObserver& observer) {
  config.validate();
  const Index n = C.size();
  if (config.rank > n)
    throw Error("rank " + std::to_string(config.rank) + " exceeds column count " +
                std::to_string(n));
  if (!(C.frob_sq() > 0.0)) throw Error("data matrix is all zero");

  std::mt19937_64 rng(config.criterion.seed);
  NnlsWorkspace ws(C);
  XrayResult result;
  double previous = C.frob_sq();

  while (ws.rank() < config.rank) {
    const Eigen::VectorXd res = residual_norms_sq(ws, C);
    if (early_stop_check(res, C.frob_sq(), config.early_stop_tol)) {
      result.stopped_early = true;
      break;
    }

    DetectionReport report;
    if (config.criterion.kind == Criterion::kGreedy) {
      report = greedy_select(ws, C, greedy_candidates(C, ws.anchors()));
    } else {
      const auto supplier = [&](std::span<const char> rows) {
        return dist_scores(ws, C, rows);
      };
      const auto exterior =
          pick_exterior(config.criterion.kind, res, C.frob_sq(), supplier, rng);
      if (!exterior) {
        result.stopped_early = true;
        break;
      }
      report = score_ratio(residual_gram_row(ws, C, *exterior), C.col_l1(),
                         ratio_candidates(C, ws.anchors()));
      report.exterior = exterior;
    }

    if (observer.on_detection) observer.on_detection(ws, C, report);
    ws.add_anchor(C, report.chosen);
    const NnlsStats stats = ws.solve(config.loop_nnls);
    result.residual_history.push_back(stats.objective);
    result.reports.push_back(report);
    if (observer.on_projection) observer.on_projection(ws, C, report);

    if (config.improvement_threshold) {
      const double gain = previous > 0.0 ? (previous - stats.objective) / previous : 0.0;
      if (gain < *config.improvement_threshold) break;
    }
    previous = stats.objective;
  }

  if (ws.rank() > 0) {
    const NnlsStats stats = ws.solve(config.final_nnls);
    result.residual_history.back() = stats.objective;
  }
  result.anchors = ws.anchors();
  result.H = ws.B();
  return result;
}

XrayResult xray_run(const SparseMatrix& X, const XrayConfig& config,
                    const IterationObserver& observer) {
  config.validate();
  if (config.rank > X.cols())
    throw Error("rank " + std::to_string(config.rank) + " exceeds column count " +
                std::to_string(X.cols()));
  const GramCache C = gram(X);
  XrayResult result = xray_run(C, config, observer);
  if (config.refine_iters > 0 && !result.anchors.empty())
    result.refined = refine(X, result.anchors, result.H, config.refine_iters, config.final_nnls);
  return result;
}

namespace {

// W^T X as an r x n matrix, walking the stored entries of X.
Eigen::MatrixXd left_product(const Eigen::MatrixXd& W, const SparseMatrix& X) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(W.cols(), X.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < X.cols(); ++j) {
    const auto col = X.column(j);
    for (std::size_t p = 0; p < col.size(); ++p)
      out.col(j).noalias() += col.values[p] * W.row(col.rows[p]).transpose();
  }
  return out;
}

double frob_sq(const SparseMatrix& X) {
  double s = 0.0;
  for (double v : X.values()) s += v * v;
  return s;
}

}  // namespace

RefineResult refine(const SparseMatrix& X, std::span<const Index> anchors,
                    const Eigen::MatrixXd& H, int iters, const NnlsSettings& settings) {
  if (iters < 0) throw Error("refine iterations must be >= 0");
  const auto r = static_cast<Index>(anchors.size());
  if (H.rows() != r || H.cols() != X.cols()) throw Error("H must be |anchors| x n");

  RefineResult out;
  // X_A can hold negative entries when the data does; start from its
  // projection onto W >= 0 so that every iterate is feasible.
  out.W = X.select_columns(anchors).to_dense().cwiseMax(0.0);
  out.H = H;
  const double xx = frob_sq(X);

  auto objective = [&] {
    const Eigen::MatrixXd WtX = left_product(out.W, X);
    const Eigen::MatrixXd WtW = out.W.transpose() * out.W;
    return xx - 2.0 * (WtX.array() * out.H.array()).sum() +
           (out.H.transpose() * WtW * out.H).trace();
  };
  out.history.push_back(objective());
  if (iters == 0) return out;

  const SparseMatrix Xt = X.transpose();
  Eigen::VectorXd col_sq = Eigen::VectorXd::Zero(X.cols());
  Eigen::VectorXd row_sq = Eigen::VectorXd::Zero(X.rows());
  for (Index j = 0; j < X.cols(); ++j) {
    const auto c = X.column(j);
    for (std::size_t p = 0; p < c.size(); ++p) {
      col_sq[j] += c.values[p] * c.values[p];
      row_sq[c.rows[p]] += c.values[p] * c.values[p];
    }
  }
  for (int it = 0; it < iters; ++it) {
    NnlsWorkspace h_step(out.W.transpose() * out.W, left_product(out.W, X), xx, out.H,
                         col_sq, ZeroDiagonal::kZeroRow);
    h_step.solve(settings);
    out.H = h_step.B();

    // W-side: min over W^T >= 0 of ||X^T - H^T W^T||_F^2.
    NnlsWorkspace w_step(out.H * out.H.transpose(), left_product(out.H.transpose(), Xt), xx,
                         out.W.transpose(), row_sq, ZeroDiagonal::kZeroRow);
    const NnlsStats stats = w_step.solve(settings);
    out.W = w_step.B().transpose();
    out.history.push_back(stats.objective);
  }
  return out;
}

XrayResult model_select(const SparseMatrix& X, XrayConfig config, Index rank_max) {
  if (!config.improvement_threshold) throw Error("model selection needs an improvement threshold");
  config.rank = rank_max;
  return xray_run(X, config);
}

}  // namespace xray
