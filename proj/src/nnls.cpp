#include "xray/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace xray {

void NnlsSettings::validate() const {
  if (!(tol > 0.0)) throw Error("nnls tol must be > 0");
  if (max_cycles < 1) throw Error("nnls max_cycles must be >= 1");
}

NnlsWorkspace::NnlsWorkspace(Eigen::MatrixXd S, Eigen::MatrixXd CA, double frob_sq,
                             Eigen::MatrixXd B, Eigen::VectorXd col_scale,
                             ZeroDiagonal policy)
    : S_(std::move(S)),
      CA_(std::move(CA)),
      B_(std::move(B)),
      col_scale_(std::move(col_scale)),
      frob_sq_(frob_sq),
      policy_(policy) {
  if (S_.rows() != S_.cols()) throw Error("S must be square");
  if (CA_.rows() != S_.rows()) throw Error("CA must have one row per coordinate");
  if (B_.rows() != S_.rows() || B_.cols() != CA_.cols())
    throw Error("B must be r x n");
  if (col_scale_.size() != CA_.cols()) throw Error("col_scale must have n entries");
  check_inputs();
  refresh_u();
}

NnlsWorkspace::NnlsWorkspace(const GramCache& C)
    : S_(0, 0), CA_(0, C.size()), B_(0, C.size()), Ut_(0, C.size()),
      col_scale_(C.col_l2sq()), frob_sq_(C.frob_sq()) {}

NnlsWorkspace NnlsWorkspace::from_gram(const GramCache& C, std::span<const Index> anchors,
                                       const Eigen::MatrixXd* warm_start) {
  const Index n = C.size();
  const auto r = static_cast<Index>(anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    if (anchors[a] < 0 || anchors[a] >= n)
      throw Error("anchor index out of range: " + std::to_string(anchors[a]));
    for (std::size_t b = 0; b < a; ++b)
      if (anchors[a] == anchors[b])
        throw Error("duplicate anchor index: " + std::to_string(anchors[a]));
    if (!(C.coeff(anchors[a], anchors[a]) > 0.0))
      throw Error("zero column selected as anchor (anchor column " + std::to_string(anchors[a]) +
                  " has s_i = 0)");
  }
  Eigen::MatrixXd CA = gram_rows(C, anchors);
  Eigen::MatrixXd S(r, r);
  for (Index a = 0; a < r; ++a)
    for (Index b = 0; b < r; ++b) S(a, b) = CA(a, anchors[static_cast<std::size_t>(b)]);

  Eigen::MatrixXd B;
  if (warm_start != nullptr) {
    if (warm_start->rows() != r || warm_start->cols() != n)
      throw Error("warm start must be |anchors| x n");
    if ((warm_start->array() < 0.0).any()) throw Error("warm start must be non-negative");
    B = *warm_start;
  } else {
    B = Eigen::MatrixXd::Zero(r, n);
  }
  NnlsWorkspace ws(std::move(S), std::move(CA), C.frob_sq(), std::move(B), C.col_l2sq());
  ws.anchors_.assign(anchors.begin(), anchors.end());
  return ws;
}

void NnlsWorkspace::check_inputs() const {
  if (!S_.allFinite() || !CA_.allFinite() || !B_.allFinite() || !col_scale_.allFinite() ||
      !std::isfinite(frob_sq_))
    throw Error("non-finite value in nnls inputs");
  if ((B_.array() < 0.0).any()) throw Error("nnls iterate must be non-negative");
  if (policy_ == ZeroDiagonal::kReject) {
    for (Index i = 0; i < S_.rows(); ++i) {
      if (!(S_(i, i) > 0.0)) {
        std::string where = "coordinate " + std::to_string(i);
        if (static_cast<std::size_t>(i) < anchors_.size())
          where = "anchor column " + std::to_string(anchors_[static_cast<std::size_t>(i)]);
        throw Error("zero column selected as anchor (" + where + " has s_i = 0)");
      }
    }
  }
}

void NnlsWorkspace::add_anchor(const GramCache& C, Index j) {
  const Index n = cols();
  if (j < 0 || j >= n) throw Error("anchor index out of range: " + std::to_string(j));
  if (std::find(anchors_.begin(), anchors_.end(), j) != anchors_.end())
    throw Error("anchor already selected: " + std::to_string(j));
  if (!(C.coeff(j, j) > 0.0))
    throw Error("zero column selected as anchor (anchor column " + std::to_string(j) +
                " has s_i = 0)");
  const Index r = rank();
  S_.conservativeResize(r + 1, r + 1);
  CA_.conservativeResize(r + 1, n);
  B_.conservativeResize(r + 1, n);
  Ut_.conservativeResize(r + 1, n);
  CA_.row(r).setZero();
  C.for_each_in_column(j, [&](Index k, double v) { CA_(r, k) = v; });
  for (Index a = 0; a < r; ++a) {
    S_(a, r) = CA_(r, anchors_[static_cast<std::size_t>(a)]);
    S_(r, a) = S_(a, r);
  }
  S_(r, r) = CA_(r, j);
  B_.row(r).setZero();
  Ut_.row(r).setZero();
  anchors_.push_back(j);
}

void NnlsWorkspace::refresh_u() {
  const Index r = rank();
  const Index n = cols();
  Ut_.resize(r, n);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j) {
    auto u = Ut_.col(j);
    u.setZero();
    for (Index a = 0; a < r; ++a) {
      const double b = B_(a, j);
      if (b != 0.0) u.noalias() += b * S_.col(a);
    }
  }
}

double NnlsWorkspace::cycle_column(Index j) {
  const Index r = rank();
  double* b = B_.col(j).data();
  double* u = Ut_.col(j).data();
  const double* ca = CA_.col(j).data();
  double decrease = 0.0;
  for (Index i = 0; i < r; ++i) {
    const double s = S_(i, i);
    const double b_old = b[i];
    double b_new = 0.0;
    if (s > 0.0) {
      // Coordinate i restricted objective: s * (b - target)^2 + const.
      const double target = (ca[i] - (u[i] - s * b_old)) / s;
      b_new = std::max(0.0, target);
      decrease += target >= 0.0 ? s * (b_old - target) * (b_old - target)
                                : s * b_old * (b_old - 2.0 * target);
    }
    if (b_new != b_old) {
      const double delta = b_new - b_old;
      const double* si = S_.col(i).data();
      for (Index k = 0; k < r; ++k) u[k] += delta * si[k];
      b[i] = b_new;
    }
  }
  return decrease;
}

double NnlsWorkspace::cycle() {
  const Index n = cols();
  Eigen::VectorXd dec(n);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j) dec[j] = cycle_column(j);
  double total = 0.0;
  for (Index j = 0; j < n; ++j) total += dec[j];
  return total;
}

double NnlsWorkspace::objective() const {
  const Index n = cols();
  const Index r = rank();
  Eigen::VectorXd part(n);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j) {
    const double* b = B_.col(j).data();
    const double* u = Ut_.col(j).data();
    const double* ca = CA_.col(j).data();
    double s = 0.0;
    for (Index i = 0; i < r; ++i)
      if (b[i] != 0.0) s += (u[i] - 2.0 * ca[i]) * b[i];
    part[j] = s;
  }
  double total = frob_sq_;
  for (Index j = 0; j < n; ++j) total += part[j];
  return total;
}

NnlsStats NnlsWorkspace::solve(const NnlsSettings& settings) {
  settings.validate();
  refresh_u();
  const Index n = cols();
  NnlsStats stats;
  double tracked = objective();
  stats.history.push_back(tracked);

  std::vector<Index> active(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) active[static_cast<std::size_t>(j)] = j;
  Eigen::VectorXd dec(n);
  for (int c = 1; c <= settings.max_cycles && !active.empty(); ++c) {
    const auto count = static_cast<Index>(active.size());
#pragma omp parallel for schedule(static)
    for (Index a = 0; a < count; ++a) {
      const Index j = active[static_cast<std::size_t>(a)];
      dec[j] = cycle_column(j);
    }
    // Fixed-order bookkeeping keeps the result independent of the worker count.
    std::size_t kept = 0;
    for (Index a = 0; a < count; ++a) {
      const Index j = active[static_cast<std::size_t>(a)];
      tracked -= dec[j];
      if (dec[j] > settings.tol * col_scale_[j]) active[kept++] = j;
    }
    active.resize(kept);
    stats.history.push_back(tracked);
    stats.cycles = c;
  }
  stats.objective = objective();
  return stats;
}

double NnlsWorkspace::u_drift() const {
  const Eigen::MatrixXd exact = S_ * B_;
  const double scale = std::max(1.0, Ut_.cwiseAbs().maxCoeff());
  if (exact.size() == 0) return 0.0;
  return (Ut_ - exact).cwiseAbs().maxCoeff() / scale;
}

double NnlsWorkspace::kkt_violation() const {
  if (rank() == 0 || cols() == 0) return 0.0;
  return (CA_ - Ut_).maxCoeff();
}

NnlsResult nnls_solve(const GramCache& C, std::span<const Index> anchors,
                      const Eigen::MatrixXd* warm_start, const NnlsSettings& settings) {
  settings.validate();
  NnlsWorkspace ws = NnlsWorkspace::from_gram(C, anchors, warm_start);
  NnlsStats stats = ws.solve(settings);
  return {ws.B(), stats.objective, stats.cycles, std::move(stats.history)};
}

Eigen::VectorXd residual_gram_row(const NnlsWorkspace& ws, const GramCache& C, Index i) {
  Eigen::VectorXd out = C.column(i);
  for (Index a = 0; a < ws.rank(); ++a) {
    const double h = ws.B()(a, i);
    if (h != 0.0) out.noalias() -= h * ws.CA().row(a).transpose();
  }
  return out;
}

Eigen::VectorXd residual_norms_sq(const NnlsWorkspace& ws, const GramCache& C) {
  const Index n = C.size();
  const Index r = ws.rank();
  Eigen::VectorXd out(n);
  const Eigen::VectorXd& diag = C.col_l2sq();
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < n; ++k) {
    const double* b = ws.B().col(k).data();
    const double* u = ws.Ut().col(k).data();
    const double* ca = ws.CA().col(k).data();
    double v = diag[k];
    for (Index a = 0; a < r; ++a)
      if (b[a] != 0.0) v += (u[a] - 2.0 * ca[a]) * b[a];
    out[k] = std::max(0.0, v);
  }
  return out;
}

}  // namespace xray
