#include "xray/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace xray {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double dot(const double* a, const double* b, Index r) {
  double s = 0.0;
  for (Index i = 0; i < r; ++i) s += a[i] * b[i];
  return s;
}

Mask unselected(Index n, std::span<const Index> anchors) {
  Mask mask(static_cast<std::size_t>(n), 1);
  for (Index a : anchors) mask[static_cast<std::size_t>(a)] = 0;
  return mask;
}

}  // namespace

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::kRand: return "rand";
    case Criterion::kMax: return "max";
    case Criterion::kDist: return "dist";
    case Criterion::kGreedy: return "greedy";
  }
  return "unknown";
}

Criterion parse_criterion(std::string_view name) {
  if (name == "rand") return Criterion::kRand;
  if (name == "max") return Criterion::kMax;
  if (name == "dist") return Criterion::kDist;
  if (name == "greedy") return Criterion::kGreedy;
  throw Error("unknown selection criterion: " + std::string(name));
}

Mask ratio_candidates(const GramCache& C, std::span<const Index> anchors) {
  const Index n = C.size();
  Mask mask = unselected(n, anchors);
  if (n == 0) return mask;
  const double floor = kDenomEps * C.col_l1().cwiseAbs().mean();
  for (Index j = 0; j < n; ++j)
    if (!(C.col_l1()[j] > floor)) mask[static_cast<std::size_t>(j)] = 0;
  return mask;
}

Mask greedy_candidates(const GramCache& C, std::span<const Index> anchors) {
  const Index n = C.size();
  Mask mask = unselected(n, anchors);
  for (Index j = 0; j < n; ++j)
    if (!(C.col_l2sq()[j] > 0.0)) mask[static_cast<std::size_t>(j)] = 0;
  return mask;
}

DetectionReport argmax_with_ties(const Eigen::VectorXd& scores, std::span<const char> mask) {
  const Index n = scores.size();
  Index best = -1;
  for (Index j = 0; j < n; ++j) {
    if (!mask[static_cast<std::size_t>(j)]) continue;
    if (best < 0 || scores[j] > scores[best]) best = j;
  }
  if (best < 0) throw Error("no exterior candidates");
  const double top = scores[best];
  const double cut = top - kTieTolerance * std::abs(top);
  DetectionReport report;
  for (Index j = 0; j < n; ++j)
    if (mask[static_cast<std::size_t>(j)] && scores[j] >= cut) report.ties.push_back(j);
  report.chosen = report.ties.front();
  report.score = scores[report.chosen];
  return report;
}

Eigen::VectorXd ratio_scores(const Eigen::VectorXd& residual_row, const Eigen::VectorXd& col_l1,
                             std::span<const char> mask) {
  const Index n = residual_row.size();
  if (col_l1.size() != n || static_cast<Index>(mask.size()) != n)
    throw Error("ratio scoring: length mismatch");
  Eigen::VectorXd scores(n);
  for (Index j = 0; j < n; ++j)
    scores[j] = mask[static_cast<std::size_t>(j)] ? residual_row[j] / col_l1[j] : kNegInf;
  return scores;
}

DetectionReport score_ratio(const Eigen::VectorXd& residual_row, const Eigen::VectorXd& col_l1,
                          std::span<const char> mask) {
  return argmax_with_ties(ratio_scores(residual_row, col_l1, mask), mask);
}

Mask exterior_points(const Eigen::VectorXd& res_norms_sq, double frob_sq) {
  const Index n = res_norms_sq.size();
  Mask mask(static_cast<std::size_t>(n), 0);
  if (n == 0) return mask;
  const double eps = kExteriorEps * frob_sq / static_cast<double>(n);
  for (Index k = 0; k < n; ++k) mask[static_cast<std::size_t>(k)] = res_norms_sq[k] > eps;
  return mask;
}

Eigen::VectorXd dist_scores(const NnlsWorkspace& ws, const GramCache& C,
                            std::span<const char> rows) {
  const Index n = C.size();
  const Index r = ws.rank();
  const bool skip_zeros = C.data_nonnegative();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (Index k = 0; k < n; ++k) {
    if (!rows[static_cast<std::size_t>(k)]) continue;
    const double* hk = ws.B().col(k).data();
    double s = 0.0;
    if (skip_zeros) {
      // (C_A H)^T >= 0, so entries where C(k, j) = 0 clamp to zero.
      C.for_each_in_column(k, [&](Index j, double c) {
        const double v = c - dot(hk, ws.CA().col(j).data(), r);
        if (v > 0.0) s += v * v;
      });
    } else {
      const Eigen::VectorXd row = residual_gram_row(ws, C, k);
      for (Index j = 0; j < n; ++j)
        if (row[j] > 0.0) s += row[j] * row[j];
    }
    out[k] = s;
  }
  return out;
}

std::optional<Index> pick_exterior(
    Criterion criterion, const Eigen::VectorXd& res_norms_sq, double frob_sq,
    const std::function<Eigen::VectorXd(std::span<const char>)>& dist_supplier,
    std::mt19937_64& rng) {
  const Mask exterior = exterior_points(res_norms_sq, frob_sq);
  std::vector<Index> qualifying;
  for (Index k = 0; k < res_norms_sq.size(); ++k)
    if (exterior[static_cast<std::size_t>(k)]) qualifying.push_back(k);
  if (qualifying.empty()) return std::nullopt;

  switch (criterion) {
    case Criterion::kRand: {
      std::uniform_int_distribution<std::size_t> pick(0, qualifying.size() - 1);
      return qualifying[pick(rng)];
    }
    case Criterion::kMax:
      return argmax_with_ties(res_norms_sq, exterior).chosen;
    case Criterion::kDist: {
      if (!dist_supplier) throw Error("dist criterion needs a residual row supplier");
      const Eigen::VectorXd q = dist_supplier(exterior);
      return argmax_with_ties(q, exterior).chosen;
    }
    case Criterion::kGreedy:
      break;
  }
  throw Error("greedy has no exterior point");
}

Eigen::VectorXd greedy_scores(const NnlsWorkspace& ws, const GramCache& C,
                              std::span<const char> mask) {
  const Index n = C.size();
  const Index r = ws.rank();
  const bool skip_zeros = C.data_nonnegative();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNegInf);
#pragma omp parallel
  {
    Eigen::VectorXd col(n);
#pragma omp for schedule(dynamic, 64)
    for (Index j = 0; j < n; ++j) {
      if (!mask[static_cast<std::size_t>(j)]) continue;
      const double* caj = ws.CA().col(j).data();
      double s = 0.0;
      if (skip_zeros) {
        C.for_each_in_column(j, [&](Index k, double c) {
          const double v = c - dot(ws.B().col(k).data(), caj, r);
          if (v > 0.0) s += v * v;
        });
      } else {
        // Column j of R^T X: C(:, j) - B^T CA(:, j).
        col = C.column(j);
        if (r > 0) col.noalias() -= ws.B().transpose() * ws.CA().col(j);
        for (Index k = 0; k < n; ++k)
          if (col[k] > 0.0) s += col[k] * col[k];
      }
      out[j] = s / C.col_l2sq()[j];
    }
  }
  return out;
}

DetectionReport greedy_select(const NnlsWorkspace& ws, const GramCache& C,
                              std::span<const char> mask) {
  return argmax_with_ties(greedy_scores(ws, C, mask), mask);
}

}  // namespace xray
