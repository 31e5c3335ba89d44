#include <doctest.h>

#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace xray;

namespace {

SparseMatrix from_cols(std::initializer_list<std::initializer_list<double>> cols) {
  const Index n = static_cast<Index>(cols.size());
  const Index m = static_cast<Index>(cols.begin()->size());
  Eigen::MatrixXd X(m, n);
  Index j = 0;
  for (const auto& c : cols) {
    Index i = 0;
    for (double v : c) X(i++, j) = v;
    ++j;
  }
  return SparseMatrix::from_dense(X);
}

}  // namespace

TEST_CASE("exact conic representation") {
  const SparseMatrix X = from_cols({{1, 0}, {0, 1}, {1, 1}});
  const std::vector<Index> A{0, 1};
  const NnlsResult res = nnls_solve(gram(X), A, nullptr);
  Eigen::MatrixXd expected(2, 3);
  expected << 1, 0, 1,
              0, 1, 1;
  CHECK((res.B - expected).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(std::abs(res.objective) <= 1e-14);
}

TEST_CASE("two-variable active set") {
  // Anchors (1,0) and (1,1); the target (0,1) lands on the face spanned by
  // (1,1) alone.
  const SparseMatrix X = from_cols({{1, 0}, {1, 1}, {0, 1}});
  const Eigen::MatrixXd Xd = X.to_dense();
  const std::vector<Index> A{0, 1};
  const NnlsResult res = nnls_solve(gram(X), A, nullptr);

  const auto opt = oracle::exhaustive_nnls(oracle::anchor_cols(Xd, A), Xd.col(2));
  CHECK(opt.b(0) == 0.0);
  CHECK(opt.b(1) == doctest::Approx(0.5));
  CHECK(opt.objective == doctest::Approx(0.5));

  CHECK(res.B(0, 2) == 0.0);
  CHECK(res.B(1, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(res.objective == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(res.objective == doctest::Approx(oracle::objective(Xd, A, res.B)).epsilon(1e-12));
}

TEST_CASE("warm start at the solution is a fixed point") {
  const SparseMatrix X = from_cols({{2, 1}, {4, 2}, {1, 3}});
  const GramCache C = gram(X);
  const std::vector<Index> A{0};
  const NnlsResult first = nnls_solve(C, A, nullptr);
  const NnlsResult again = nnls_solve(C, A, &first.B);
  CHECK(again.cycles == 1);
  CHECK(again.B == first.B);
}

TEST_CASE("one anchor: closed form") {
  const Eigen::MatrixXd Xd = oracle::random_dense(6, 8, 1.0, true, 5);
  const GramCache C = gram(SparseMatrix::from_dense(Xd));
  const std::vector<Index> A{3};
  NnlsWorkspace ws = NnlsWorkspace::from_gram(C, A);
  ws.cycle();
  const double s = Xd.col(3).squaredNorm();
  for (Index j = 0; j < Xd.cols(); ++j)
    CHECK(ws.B()(0, j) ==
          doctest::Approx(std::max(0.0, Xd.col(3).dot(Xd.col(j))) / s).epsilon(1e-12));
}

TEST_CASE("orthogonal anchors converge in one cycle") {
  Eigen::MatrixXd Xd(3, 4);
  Xd << 2, 0, 1, -1,
        0, 3, 2,  1,
        0, 0, 5,  2;
  const GramCache C = gram(SparseMatrix::from_dense(Xd));
  const std::vector<Index> A{0, 1};
  NnlsWorkspace ws = NnlsWorkspace::from_gram(C, A);
  ws.cycle();
  const Eigen::MatrixXd after_one = ws.B();
  const Eigen::MatrixXd u_after_one = ws.Ut();
  // Nothing moves on the second pass, so the rank-1 updates are skipped.
  const double dec = ws.cycle();
  CHECK(dec == 0.0);
  CHECK(ws.B() == after_one);
  CHECK(ws.Ut() == u_after_one);
  const Eigen::MatrixXd XA = oracle::anchor_cols(Xd, A);
  for (Index j = 0; j < Xd.cols(); ++j) {
    const auto opt = oracle::exhaustive_nnls(XA, Xd.col(j));
    CHECK((after_one.col(j) - opt.b).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("residual rows and norms on the 3-column example") {
  const SparseMatrix X = from_cols({{1, 0}, {0, 1}, {0.6, 0.4}});
  const Eigen::MatrixXd Xd = X.to_dense();
  const GramCache C = gram(X);

  NnlsWorkspace empty(C);
  CHECK(residual_gram_row(empty, C, 2) == C.column(2));
  CHECK(residual_norms_sq(empty, C) == C.col_l2sq());

  Eigen::MatrixXd H(1, 3);
  H << 1, 0, 0.6;
  const std::vector<Index> A{0};
  const NnlsWorkspace ws = NnlsWorkspace::from_gram(C, A, &H);
  const Eigen::MatrixXd R = oracle::residual(Xd, A, H);
  const Eigen::VectorXd row_oracle = Xd.transpose() * R.col(2);
  const Eigen::VectorXd row = residual_gram_row(ws, C, 2);
  CHECK((row - row_oracle).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(row(0) == doctest::Approx(0.0));
  CHECK(row(1) == doctest::Approx(0.4));
  CHECK(row(2) == doctest::Approx(0.16));

  const Eigen::VectorXd norms = residual_norms_sq(ws, C);
  const Eigen::VectorXd norms_oracle = R.colwise().squaredNorm().transpose();
  CHECK((norms - norms_oracle).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(norms(1) == doctest::Approx(1.0));
  CHECK(norms(2) == doctest::Approx(0.16));
}

TEST_CASE("anchor rows of R^T X vanish at an exact solution") {
  const SparseMatrix X = from_cols({{1, 0, 0}, {0, 1, 0}, {0.3, 0.2, 0}, {1, 1, 0}});
  const GramCache C = gram(X);
  const std::vector<Index> A{0, 1};
  NnlsWorkspace ws = NnlsWorkspace::from_gram(C, A);
  ws.solve(NnlsSettings{});
  for (Index a : A) CHECK(residual_gram_row(ws, C, a).maxCoeff() <= 1e-10);
}

TEST_CASE("errors") {
  const SparseMatrix X = from_cols({{1, 0}, {0, 0}, {1, 1}});
  const GramCache C = gram(X);
  const std::vector<Index> zero_col{1};
  CHECK_THROWS_WITH_AS(nnls_solve(C, zero_col, nullptr), doctest::Contains("1"), Error);
  const std::vector<Index> dup{0, 0};
  CHECK_THROWS_AS(nnls_solve(C, dup, nullptr), Error);
  const std::vector<Index> out{5};
  CHECK_THROWS_AS(nnls_solve(C, out, nullptr), Error);
  const std::vector<Index> ok{0};
  Eigen::MatrixXd neg = Eigen::MatrixXd::Zero(1, 3);
  neg(0, 1) = -1.0;
  CHECK_THROWS_AS(nnls_solve(C, ok, &neg), Error);
  Eigen::MatrixXd wrong = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(nnls_solve(C, ok, &wrong), Error);
  CHECK_THROWS_AS(NnlsSettings({0.0, 10}).validate(), Error);
  CHECK_THROWS_AS(NnlsSettings({1e-10, 0}).validate(), Error);
}

TEST_CASE("random instances: optimality, KKT, slackness, monotone objective") {
  std::mt19937_64 rng(2024);
  for (int inst = 0; inst < 60; ++inst) {
    const Index m = 3 + static_cast<Index>(rng() % 10);
    const Index n = 2 + static_cast<Index>(rng() % 14);
    const Index r = 1 + static_cast<Index>(rng() % std::min<Index>(4, std::min(m, n)));
    const bool mixed = inst % 2 == 0;
    const Eigen::MatrixXd Xd = oracle::random_dense(m, n, 1.0, mixed, 100 + inst);
    std::vector<Index> A(static_cast<std::size_t>(n));
    std::iota(A.begin(), A.end(), 0);
    std::shuffle(A.begin(), A.end(), rng);
    A.resize(static_cast<std::size_t>(r));

    const GramCache C = gram(SparseMatrix::from_dense(Xd));
    NnlsWorkspace ws = NnlsWorkspace::from_gram(C, A);
    double prev = oracle::objective(Xd, A, ws.B());
    for (int c = 0; c < 300; ++c) {
      ws.cycle();
      const double now = oracle::objective(Xd, A, ws.B());
      CHECK(now <= prev + 1e-12 * std::max(1.0, prev));
      prev = now;
    }
    ws.solve(NnlsSettings{});

    CHECK((ws.B().array() >= 0.0).all());
    CHECK(std::abs(ws.objective() - oracle::objective(Xd, A, ws.B())) <= 1e-10 * C.frob_sq());
    CHECK(ws.objective() <= oracle::exhaustive_objective(Xd, A) + 1e-6);

    const Eigen::MatrixXd R = oracle::residual(Xd, A, ws.B());
    const Eigen::MatrixXd RtXA = R.transpose() * oracle::anchor_cols(Xd, A);  // n x r
    const double scale = std::sqrt(C.frob_sq() * C.col_l2sq().maxCoeff());
    CHECK(RtXA.maxCoeff() <= 1e-6 * scale);
    CHECK(ws.kkt_violation() <= 1e-6 * scale);
    CHECK((ws.B().transpose().array() * RtXA.array()).abs().maxCoeff() <= 1e-6 * scale);
    CHECK(ws.u_drift() <= 1e-8);
  }
}

TEST_CASE("solve history is non-increasing and ends at the exact objective") {
  const Eigen::MatrixXd Xd = oracle::random_dense(12, 15, 1.0, false, 77);
  const GramCache C = gram(SparseMatrix::from_dense(Xd));
  const std::vector<Index> A{1, 4, 9, 13};
  const NnlsResult res = nnls_solve(C, A, nullptr);
  REQUIRE(res.history.size() == static_cast<std::size_t>(res.cycles) + 1);
  for (std::size_t k = 1; k < res.history.size(); ++k) CHECK(res.history[k] <= res.history[k - 1]);
  CHECK(res.objective == doctest::Approx(oracle::objective(Xd, A, res.B)).epsilon(1e-10));
}

TEST_CASE("warm start reaches the same optimum") {
  const Eigen::MatrixXd Xd = oracle::random_dense(10, 12, 1.0, false, 31);
  const GramCache C = gram(SparseMatrix::from_dense(Xd));
  const std::vector<Index> A{0, 5, 7};
  const NnlsResult cold = nnls_solve(C, A, nullptr);
  const Eigen::MatrixXd start = Eigen::MatrixXd::Constant(3, 12, 0.7);
  const NnlsResult warm = nnls_solve(C, A, &start);
  CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
  CHECK((warm.B - cold.B).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("U drift stays small over many cycles") {
  const Eigen::MatrixXd Xd = oracle::random_dense(30, 40, 1.0, false, 3);
  const GramCache C = gram(SparseMatrix::from_dense(Xd));
  const std::vector<Index> A{0, 3, 6, 9, 12, 15};
  NnlsWorkspace ws = NnlsWorkspace::from_gram(C, A);
  for (int c = 0; c < 2000; ++c) ws.cycle();
  CHECK(ws.u_drift() <= 1e-8);
}

TEST_CASE("add_anchor matches a fresh workspace") {
  const Eigen::MatrixXd Xd = oracle::random_dense(8, 10, 1.0, false, 4);
  const GramCache C = gram(SparseMatrix::from_dense(Xd));
  NnlsWorkspace grown(C);
  grown.add_anchor(C, 2);
  grown.add_anchor(C, 7);
  const std::vector<Index> A{2, 7};
  const NnlsWorkspace fresh = NnlsWorkspace::from_gram(C, A);
  CHECK(grown.S() == fresh.S());
  CHECK(grown.CA() == fresh.CA());
  CHECK(grown.anchors() == fresh.anchors());
  CHECK_THROWS_AS(grown.add_anchor(C, 7), Error);
}
