#pragma once

#include "xray/sparse.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xray {

// MatrixMarket "coordinate real general", 1-based, duplicates summed.
// Errors carry the 1-based line number.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::filesystem::path& path);

// Entries sorted column-major, values printed with 17 significant digits.
void write_matrix_market(const SparseMatrix& M, std::ostream& out);
void write_matrix_market(const SparseMatrix& M, const std::filesystem::path& path);
// Dense input: only non-zero entries are written.
void write_matrix_market(const Eigen::MatrixXd& M, const std::filesystem::path& path);

struct DocTermTriple {
  std::string doc;
  std::string term;
  double count = 0.0;
};

// `doc<TAB>term<TAB>count` per line; blank lines and lines starting with '#'
// are skipped.
std::vector<DocTermTriple> read_docterm_triples(std::istream& in);
std::vector<DocTermTriple> read_docterm_triples(const std::filesystem::path& path);

struct CorpusStats {
  Index n_docs = 0;
  Index n_terms = 0;              // kept terms, one per column
  std::vector<Index> df;          // per kept term
  std::vector<std::string> terms; // column -> label
  std::vector<std::string> docs;  // row -> document id
};

struct DocTermMatrix {
  SparseMatrix X;  // documents x terms
  CorpusStats stats;
};

/// TF-IDF document-term matrix, entry tf * ln(n_docs / df). Terms with
/// df < min_df or df > max_df_frac * n_docs are dropped. Documents and terms
/// are both ordered by sorted label, so the result does not depend on the
/// order of the input stream. A term present in every document keeps its
/// column but has no stored entries (its idf is 0).
DocTermMatrix build_docterm(std::span<const DocTermTriple> triples, Index min_df = 1,
                            double max_df_frac = 1.0);

enum class NormalizationMode { kNone, kL1, kL2 };

std::string_view to_string(NormalizationMode mode);
NormalizationMode parse_normalization(std::string_view name);

struct NormalizedMatrix {
  SparseMatrix X;
  std::vector<Index> zero_columns;  // left untouched
};

NormalizedMatrix normalize_columns(const SparseMatrix& X, NormalizationMode mode);

// rank<TAB>column<TAB>label, 1-based rank and column; label blank without a
// vocabulary.
void write_anchor_report(std::ostream& out, std::span<const Index> anchors,
                         std::span<const std::string> labels = {});
void write_anchor_report(const std::filesystem::path& path, std::span<const Index> anchors,
                         std::span<const std::string> labels = {});

// column<TAB>term, 1-based column.
void write_vocabulary(const std::filesystem::path& path, std::span<const std::string> terms);
std::vector<std::string> read_vocabulary(const std::filesystem::path& path);

}  // namespace xray
