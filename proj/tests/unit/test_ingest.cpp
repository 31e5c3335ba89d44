#include <doctest.h>

#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace xray;

namespace {

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("xray_unit_" + name);
}

}  // namespace

TEST_CASE("MatrixMarket identity") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real general\n"
      "% comment\n"
      "2 2 2\n"
      "1 1 1\n"
      "2 2 1\n");
  CHECK(read_matrix_market(in).to_dense() == Eigen::MatrixXd::Identity(2, 2));
}

TEST_CASE("MatrixMarket duplicates and integer fields") {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate integer general\n"
      "2 1 2\n"
      "2 1 3\n"
      "2 1 4\n");
  const SparseMatrix M = read_matrix_market(in);
  CHECK(M.nnz() == 1);
  CHECK(M.coeff(1, 0) == 7.0);
}

TEST_CASE("MatrixMarket errors name the line") {
  std::istringstream out_of_range(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 1\n"
      "3 1 1.0\n");
  CHECK_THROWS_WITH_AS(read_matrix_market(out_of_range), doctest::Contains("line 3"), Error);

  std::istringstream bad_value(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 1\n"
      "1 1 abc\n");
  CHECK_THROWS_WITH_AS(read_matrix_market(bad_value), doctest::Contains("line 3"), Error);

  std::istringstream short_file(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 2\n"
      "1 1 1\n");
  CHECK_THROWS_AS(read_matrix_market(short_file), Error);

  std::istringstream array(
      "%%MatrixMarket matrix array real general\n"
      "1 1\n"
      "1\n");
  CHECK_THROWS_AS(read_matrix_market(array), Error);

  CHECK_THROWS_AS(read_matrix_market(scratch("does_not_exist.mtx")), Error);
}

TEST_CASE("MatrixMarket round trip is exact") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Eigen::MatrixXd D = oracle::random_dense(9, 7, 0.4, true, seed);
    D(0, 0) = 1.0 / 3.0;
    D(1, 1) = 1e-300;
    const SparseMatrix M = SparseMatrix::from_dense(D);
    std::stringstream buf;
    write_matrix_market(M, buf);
    CHECK(read_matrix_market(buf) == M);
  }
}

TEST_CASE("empty matrix writes a header and a size line") {
  std::ostringstream out;
  write_matrix_market(SparseMatrix::from_dense(Eigen::MatrixXd::Zero(3, 4)), out);
  const std::string s = out.str();
  CHECK(s.find("3 4 0\n") != std::string::npos);
  std::istringstream in(s);
  const SparseMatrix back = read_matrix_market(in);
  CHECK(back.rows() == 3);
  CHECK(back.cols() == 4);
  CHECK(back.nnz() == 0);
}

TEST_CASE("H from the exact 3-column run survives a file round trip") {
  Eigen::MatrixXd X(2, 3);
  X << 1, 0, 0.6,
       0, 1, 0.4;
  XrayConfig cfg;
  cfg.rank = 2;
  cfg.criterion = {Criterion::kMax, 0};
  const XrayResult res = xray_run(SparseMatrix::from_dense(X), cfg);
  const auto path = scratch("h.mtx");
  write_matrix_market(res.H, path);
  const Eigen::MatrixXd H = read_matrix_market(path).to_dense();
  std::filesystem::remove(path);
  CHECK(H == res.H);
  CHECK(oracle::objective(X, res.anchors, H) <= 1e-20);
}

TEST_CASE("doc-term triples parsing") {
  std::istringstream in("# header\nd1\tapple\t2\n\nd2\tpear\t1.5\n");
  const auto t = read_docterm_triples(in);
  REQUIRE(t.size() == 2);
  CHECK(t[0].doc == "d1");
  CHECK(t[0].term == "apple");
  CHECK(t[1].count == 1.5);

  std::istringstream zero("d1\tapple\t0\n");
  CHECK_THROWS_AS(read_docterm_triples(zero), Error);
  std::istringstream missing("d1 apple 2\n");
  CHECK_THROWS_AS(read_docterm_triples(missing), Error);
}

TEST_CASE("tf-idf weighting") {
  SUBCASE("a term in every document gets idf 0") {
    const std::vector<DocTermTriple> t{{"a", "common", 1}, {"b", "common", 1}, {"a", "rare", 1}};
    const DocTermMatrix dt = build_docterm(t);
    CHECK(dt.stats.n_docs == 2);
    REQUIRE(dt.stats.n_terms == 2);
    CHECK(dt.stats.terms[0] == "common");
    CHECK(dt.X.column(0).size() == 0);
    CHECK(dt.X.coeff(0, 1) == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("one document out of four") {
    const std::vector<DocTermTriple> t{
        {"d1", "x", 3}, {"d1", "y", 1}, {"d2", "y", 1}, {"d3", "y", 1}, {"d4", "y", 1}};
    const DocTermMatrix dt = build_docterm(t);
    CHECK(dt.X.coeff(0, 0) == doctest::Approx(3.0 * std::log(4.0)).epsilon(1e-15));
    CHECK(dt.stats.df == std::vector<Index>{1, 4});
  }
  SUBCASE("document-frequency thresholds") {
    const std::vector<DocTermTriple> t{
        {"d1", "solo", 1}, {"d1", "pair", 1}, {"d2", "pair", 1}, {"d3", "lone", 2}, {"d3", "pair", 1}};
    CHECK(build_docterm(t).stats.n_terms == 3);
    const DocTermMatrix dt = build_docterm(t, 2);
    CHECK(dt.stats.n_terms == 1);
    CHECK(dt.stats.terms[0] == "pair");
    CHECK(build_docterm(t, 1, 0.5).stats.n_terms == 2);
    CHECK_THROWS_AS(build_docterm(t, 4), Error);
  }
}

TEST_CASE("build_docterm ignores input order") {
  std::vector<DocTermTriple> t;
  std::mt19937_64 rng(1);
  for (int k = 0; k < 60; ++k)
    t.push_back({"doc" + std::to_string(rng() % 9), "w" + std::to_string(rng() % 15),
                 static_cast<double>(1 + rng() % 4)});
  const DocTermMatrix ref = build_docterm(t);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(t.begin(), t.end(), rng);
    const DocTermMatrix dt = build_docterm(t);
    CHECK(dt.X == ref.X);
    CHECK(dt.stats.terms == ref.stats.terms);
    CHECK(dt.stats.docs == ref.stats.docs);
  }
}

TEST_CASE("column normalization") {
  Eigen::MatrixXd D(3, 3);
  D << 3, 1, 0,
       4, 1, 0,
       0, 2, 0;
  const SparseMatrix X = SparseMatrix::from_dense(D);
  CHECK(normalize_columns(X, NormalizationMode::kNone).X == X);

  const NormalizedMatrix l2 = normalize_columns(X, NormalizationMode::kL2);
  CHECK(l2.X.coeff(0, 0) == doctest::Approx(0.6));
  CHECK(l2.X.coeff(1, 0) == doctest::Approx(0.8));
  CHECK(l2.zero_columns == std::vector<Index>{2});

  const NormalizedMatrix l1 = normalize_columns(X, NormalizationMode::kL1);
  CHECK(l1.X.coeff(0, 1) == doctest::Approx(0.25));
  CHECK(l1.X.coeff(2, 1) == doctest::Approx(0.5));

  for (auto m : {NormalizationMode::kNone, NormalizationMode::kL1, NormalizationMode::kL2})
    CHECK(parse_normalization(to_string(m)) == m);
  CHECK_THROWS_AS(parse_normalization("l3"), Error);
}

TEST_CASE("normalized columns have unit norm") {
  const SparseMatrix X = SparseMatrix::from_dense(oracle::random_dense(40, 30, 0.2, true, 6));
  const Eigen::MatrixXd l1 = normalize_columns(X, NormalizationMode::kL1).X.to_dense();
  const Eigen::MatrixXd l2 = normalize_columns(X, NormalizationMode::kL2).X.to_dense();
  for (Index j = 0; j < X.cols(); ++j) {
    if (X.column(j).size() == 0) continue;
    CHECK(std::abs(l1.col(j).lpNorm<1>() - 1.0) <= 1e-12);
    CHECK(std::abs(l2.col(j).norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("anchor report and vocabulary files") {
  std::ostringstream out;
  const std::vector<Index> anchors{4, 0};
  const std::vector<std::string> labels{"a", "b", "c", "d", "e"};
  write_anchor_report(out, anchors, labels);
  CHECK(out.str() == "1\t5\te\n2\t1\ta\n");
  std::ostringstream bare;
  write_anchor_report(bare, anchors);
  CHECK(bare.str() == "1\t5\t\n2\t1\t\n");

  const auto path = scratch("vocab.tsv");
  write_vocabulary(path, labels);
  CHECK(read_vocabulary(path) == labels);
  std::filesystem::remove(path);
}
