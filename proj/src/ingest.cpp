#include "xray/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace xray {

namespace {

Error line_error(std::size_t line, const std::string& what) {
  return Error("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw line_error(1, "missing MatrixMarket header");
  ++lineno;
  const auto head = split_ws(line);
  if (head.size() != 5 || head[0] != "%%MatrixMarket" || lower(head[1]) != "matrix" ||
      lower(head[2]) != "coordinate" ||
      (lower(head[3]) != "real" && lower(head[3]) != "integer") || lower(head[4]) != "general")
    throw line_error(lineno, "expected '%%MatrixMarket matrix coordinate real general'");

  Index rows = -1, cols = -1, declared = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    const auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 3 || !parse_number(f[0], rows) || !parse_number(f[1], cols) ||
        !parse_number(f[2], declared) || rows < 0 || cols < 0 || declared < 0)
      throw line_error(lineno, "malformed size line");
    break;
  }
  if (declared < 0) throw line_error(lineno, "missing size line");

  std::vector<Triple> triples;
  triples.reserve(static_cast<std::size_t>(declared));
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    const auto f = split_ws(line);
    if (f.empty()) continue;
    Index i = 0, j = 0;
    double v = 0.0;
    if (f.size() != 3 || !parse_number(f[0], i) || !parse_number(f[1], j))
      throw line_error(lineno, "malformed entry");
    if (!parse_number(f[2], v)) throw line_error(lineno, "non-numeric value '" + std::string(f[2]) + "'");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw line_error(lineno, "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                   ") outside declared " + std::to_string(rows) + "x" +
                                   std::to_string(cols) + " matrix");
    if (static_cast<Index>(triples.size()) == declared)
      throw line_error(lineno, "more entries than the declared " + std::to_string(declared));
    triples.push_back({i - 1, j - 1, v});
  }
  if (static_cast<Index>(triples.size()) != declared)
    throw line_error(lineno, "expected " + std::to_string(declared) + " entries, found " +
                                 std::to_string(triples.size()));
  return SparseMatrix::from_triples(triples, rows, cols);
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_matrix_market(in);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_matrix_market(const SparseMatrix& M, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << M.rows() << ' ' << M.cols() << ' ' << M.nnz() << '\n';
  for (Index j = 0; j < M.cols(); ++j) {
    const auto c = M.column(j);
    for (std::size_t p = 0; p < c.size(); ++p)
      out << c.rows[p] + 1 << ' ' << j + 1 << ' ' << fmt17(c.values[p]) << '\n';
  }
}

void write_matrix_market(const SparseMatrix& M, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_matrix_market(M, out);
  if (!out) throw Error("write failed: " + path.string());
}

void write_matrix_market(const Eigen::MatrixXd& M, const std::filesystem::path& path) {
  write_matrix_market(SparseMatrix::from_dense(M), path);
}

std::vector<DocTermTriple> read_docterm_triples(std::istream& in) {
  std::vector<DocTermTriple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos)
      throw line_error(lineno, "expected doc<TAB>term<TAB>count");
    DocTermTriple t{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), 0.0};
    if (t.doc.empty() || t.term.empty()) throw line_error(lineno, "empty document or term");
    if (!parse_number(std::string_view(line).substr(t2 + 1), t.count))
      throw line_error(lineno, "non-numeric count");
    if (!(t.count > 0.0)) throw line_error(lineno, "count must be > 0");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<DocTermTriple> read_docterm_triples(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_docterm_triples(in);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

DocTermMatrix build_docterm(std::span<const DocTermTriple> triples, Index min_df,
                            double max_df_frac) {
  if (min_df < 0) throw Error("min_df must be >= 0");
  if (!(max_df_frac >= 0.0)) throw Error("max_df_frac must be >= 0");

  // (doc, term) -> summed count; ordered maps give label-sorted ids.
  std::map<std::string, std::map<std::string, double>> by_term;
  std::map<std::string, Index> doc_ids;
  for (const auto& t : triples) {
    if (!(t.count > 0.0)) throw Error("count must be > 0 for " + t.doc + "/" + t.term);
    by_term[t.term][t.doc] += t.count;
    doc_ids.emplace(t.doc, 0);
  }
  Index next = 0;
  for (auto& [doc, id] : doc_ids) id = next++;
  const Index n_docs = next;

  DocTermMatrix out;
  out.stats.n_docs = n_docs;
  for (const auto& [doc, id] : doc_ids) out.stats.docs.push_back(doc);

  std::vector<Triple> entries;
  for (const auto& [term, postings] : by_term) {
    const auto df = static_cast<Index>(postings.size());
    if (df < min_df || static_cast<double>(df) > max_df_frac * static_cast<double>(n_docs))
      continue;
    const Index col = static_cast<Index>(out.stats.terms.size());
    out.stats.terms.push_back(term);
    out.stats.df.push_back(df);
    const double idf = std::log(static_cast<double>(n_docs) / static_cast<double>(df));
    for (const auto& [doc, tf] : postings) {
      const double v = tf * idf;
      if (v != 0.0) entries.push_back({doc_ids.at(doc), col, v});
    }
  }
  out.stats.n_terms = static_cast<Index>(out.stats.terms.size());
  if (out.stats.n_terms == 0 || n_docs == 0)
    throw Error("corpus is empty after document-frequency thresholding");
  out.X = SparseMatrix::from_triples(entries, n_docs, out.stats.n_terms);
  return out;
}

std::string_view to_string(NormalizationMode mode) {
  switch (mode) {
    case NormalizationMode::kNone: return "none";
    case NormalizationMode::kL1: return "l1";
    case NormalizationMode::kL2: return "l2";
  }
  return "unknown";
}

NormalizationMode parse_normalization(std::string_view name) {
  if (name == "none") return NormalizationMode::kNone;
  if (name == "l1") return NormalizationMode::kL1;
  if (name == "l2") return NormalizationMode::kL2;
  throw Error("unknown normalization: " + std::string(name));
}

NormalizedMatrix normalize_columns(const SparseMatrix& X, NormalizationMode mode) {
  NormalizedMatrix out;
  std::vector<double> values(X.values().begin(), X.values().end());
  for (Index j = 0; j < X.cols(); ++j) {
    const Index begin = X.col_ptr()[static_cast<std::size_t>(j)];
    const Index end = X.col_ptr()[static_cast<std::size_t>(j) + 1];
    double norm = 0.0;
    for (Index p = begin; p < end; ++p) {
      const double v = values[static_cast<std::size_t>(p)];
      norm += mode == NormalizationMode::kL1 ? std::abs(v) : v * v;
    }
    if (mode == NormalizationMode::kL2) norm = std::sqrt(norm);
    if (norm == 0.0) {
      out.zero_columns.push_back(j);
      continue;
    }
    if (mode == NormalizationMode::kNone) continue;
    for (Index p = begin; p < end; ++p) values[static_cast<std::size_t>(p)] /= norm;
  }
  if (mode == NormalizationMode::kNone) {
    out.X = X;
    return out;
  }
  std::vector<Index> ptr(X.col_ptr().begin(), X.col_ptr().end());
  std::vector<Index> idx(X.row_indices().begin(), X.row_indices().end());
  out.X = SparseMatrix(X.rows(), X.cols(), std::move(ptr), std::move(idx), std::move(values));
  return out;
}

void write_anchor_report(std::ostream& out, std::span<const Index> anchors,
                         std::span<const std::string> labels) {
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const Index col = anchors[k];
    out << k + 1 << '\t' << col + 1 << '\t';
    if (col >= 0 && static_cast<std::size_t>(col) < labels.size())
      out << labels[static_cast<std::size_t>(col)];
    out << '\n';
  }
}

void write_anchor_report(const std::filesystem::path& path, std::span<const Index> anchors,
                         std::span<const std::string> labels) {
  auto out = open_out(path);
  write_anchor_report(out, anchors, labels);
}

void write_vocabulary(const std::filesystem::path& path, std::span<const std::string> terms) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < terms.size(); ++j) out << j + 1 << '\t' << terms[j] << '\n';
}

std::vector<std::string> read_vocabulary(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::string> terms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::size_t col = 0;
    if (tab == std::string::npos || !parse_number(std::string_view(line).substr(0, tab), col) ||
        col != terms.size() + 1)
      throw line_error(lineno, "expected column<TAB>term with consecutive columns");
    terms.push_back(line.substr(tab + 1));
  }
  return terms;
}

}  // namespace xray
