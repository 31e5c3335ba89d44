// Command-line front end: factorize, sweep, ingest, gram-stats.
//
// Exit status is 0 on success, 2 for bad flags and 1 when a stage fails.

#include "xray/xray.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace xray;

struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by a pipeline stage; the stage name goes into the message.
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what) {}
};

class Timer {
 public:
  explicit Timer(std::string stage) : stage_(std::move(stage)) {}
  ~Timer() {
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::fprintf(stderr, "%s,%.6f\n", stage_.c_str(), s);
  }

 private:
  std::string stage_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <class F>
auto stage(const std::string& name, F&& f) {
  Timer t(name);
  try {
    return f();
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  return os;
}

std::vector<double> parse_deltas(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw FlagError("--deltas: bad number '" + s + "'");
    return v;
  };
  const auto c1 = text.find(':');
  if (c1 != std::string::npos) {
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw FlagError("--deltas: expected lo:hi:step");
    const double lo = number(text.substr(0, c1));
    const double hi = number(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = number(text.substr(c2 + 1));
    if (!(step > 0) || hi < lo) throw FlagError("--deltas: need step > 0 and hi >= lo");
    // Index-based so that 0:1.5:0.1 gives exactly 16 values.
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= count; ++k) out.push_back(lo + static_cast<double>(k) * step);
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      out.push_back(number(text.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  for (double d : out)
    if (!(d >= 0)) throw FlagError("--deltas: noise levels must be >= 0");
  return out;
}

std::vector<Criterion> parse_variants(const std::string& text) {
  std::vector<Criterion> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    try {
      out.push_back(parse_criterion(text.substr(start, comma - start)));
    } catch (const Error& e) {
      throw FlagError(std::string("--variants: ") + e.what());
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// ---- factorize -------------------------------------------------------------

struct FactorizeFlags {
  std::string input;
  Index rank = 0;
  std::optional<double> auto_rank;
  std::string variant = "greedy";
  std::string normalize = "none";
  std::uint64_t seed = 0;
  double tol = kFinalNnls.tol;
  int max_cycles = kFinalNnls.max_cycles;
  int refine_iters = 0;
  std::string out_anchors;
  std::string out_h;
  std::string out_w;
  std::string vocab;
};

int run_factorize(const FactorizeFlags& f) {
  XrayConfig cfg;
  NormalizationMode mode{};
  try {
    cfg.criterion = {parse_criterion(f.variant), f.seed};
    mode = parse_normalization(f.normalize);
  } catch (const Error& e) {
    throw FlagError(e.what());
  }
  if (!f.auto_rank && f.rank < 1) throw FlagError("rank must be >= 1");
  if (f.auto_rank && !(*f.auto_rank >= 0)) throw FlagError("--auto-rank must be >= 0");
  if (!(f.tol > 0)) throw FlagError("--tol must be > 0");
  if (f.max_cycles < 1) throw FlagError("--max-cycles must be >= 1");
  if (f.refine_iters < 0) throw FlagError("--refine-iters must be >= 0");
  cfg.loop_nnls = {f.tol, std::min(kInLoopNnls.max_cycles, f.max_cycles)};
  cfg.final_nnls = {f.tol, f.max_cycles};
  cfg.refine_iters = f.refine_iters;

  const SparseMatrix raw = stage("read", [&] { return read_matrix_market(f.input); });
  std::vector<std::string> labels;
  if (!f.vocab.empty()) labels = stage("read-vocab", [&] { return read_vocabulary(f.vocab); });
  const SparseMatrix X = stage("normalize", [&] {
    NormalizedMatrix nm = normalize_columns(raw, mode);
    if (!nm.zero_columns.empty())
      std::fprintf(stderr, "note: %zu zero columns left as is\n", nm.zero_columns.size());
    return std::move(nm.X);
  });
  if (!labels.empty() && static_cast<Index>(labels.size()) != X.cols())
    throw StageError("read-vocab", "vocabulary has " + std::to_string(labels.size()) +
                                       " terms but the matrix has " + std::to_string(X.cols()) +
                                       " columns");

  const GramCache C = stage("gram", [&] { return gram(X); });
  const XrayResult res = stage("xray", [&] {
    if (f.auto_rank) {
      cfg.rank = f.rank >= 1 ? std::min<Index>(f.rank, X.cols()) : X.cols();
      cfg.improvement_threshold = *f.auto_rank;
    } else {
      cfg.rank = f.rank;
    }
    cfg.validate();
    return xray_run(C, cfg);
  });

  for (std::size_t t = 0; t < res.anchors.size(); ++t)
    std::fprintf(stderr, "iter %zu anchor %lld residual %.10g relative %.6g\n", t + 1,
                 static_cast<long long>(res.anchors[t]) + 1, res.residual_history[t],
                 std::sqrt(res.residual_history[t] / C.frob_sq()));
  if (res.stopped_early) std::fprintf(stderr, "stopped early after %zu anchors\n", res.anchors.size());

  std::optional<RefineResult> refined;
  if (cfg.refine_iters > 0)
    refined = stage("refine", [&] { return refine(X, res.anchors, res.H, cfg.refine_iters); });
  if (refined)
    for (std::size_t k = 0; k < refined->history.size(); ++k)
      std::fprintf(stderr, "refine %zu residual %.10g\n", k, refined->history[k]);

  stage("write", [&] {
    if (!f.out_anchors.empty()) write_anchor_report(f.out_anchors, res.anchors, labels);
    else write_anchor_report(std::cout, res.anchors, labels);
    if (!f.out_h.empty()) write_matrix_market(refined ? refined->H : res.H, f.out_h);
    if (!f.out_w.empty())
      write_matrix_market(refined ? refined->W : X.select_columns(res.anchors).to_dense(), f.out_w);
    return 0;
  });
  return 0;
}

// ---- sweep -----------------------------------------------------------------

struct SweepFlags {
  Index m = 200;
  Index r = 20;
  Index n = 210;
  std::string deltas = "0:1.5:0.1";
  int trials = 10;
  std::string variants = "rand,max,dist,greedy";
  std::uint64_t seed = 0;
  std::string out;
  std::string out_summary;
  bool no_timing = false;
};

int run_sweep(const SweepFlags& f) {
  if (f.trials < 1) throw FlagError("--trials must be >= 1");
  SyntheticSpec base;
  base.m = f.m;
  base.r_true = f.r;
  base.n = f.n;
  base.seed = f.seed;
  try {
    base.validate();
  } catch (const Error& e) {
    throw FlagError(e.what());
  }
  const std::vector<double> deltas = parse_deltas(f.deltas);
  const std::vector<Criterion> crits = parse_variants(f.variants);

  const SweepResult res = stage("sweep", [&] { return noise_sweep(base, deltas, crits, f.trials); });
  stage("write", [&] {
    if (f.out.empty()) {
      write_sweep_runs_csv(res, std::cout, !f.no_timing);
    } else {
      auto os = open_out(f.out);
      write_sweep_runs_csv(res, os, !f.no_timing);
    }
    if (!f.out_summary.empty()) {
      auto os = open_out(f.out_summary);
      write_sweep_summary_csv(res, os);
    } else {
      write_sweep_summary_csv(res, std::cerr);
    }
    return 0;
  });
  return 0;
}

// ---- ingest ----------------------------------------------------------------

struct IngestFlags {
  std::string triples;
  Index min_df = 1;
  double max_df_frac = 1.0;
  std::string out;
  std::string out_vocab;
};

int run_ingest(const IngestFlags& f) {
  if (f.min_df < 1) throw FlagError("--min-df must be >= 1");
  if (!(f.max_df_frac > 0 && f.max_df_frac <= 1)) throw FlagError("--max-df-frac must be in (0, 1]");
  const auto triples = stage("read", [&] { return read_docterm_triples(f.triples); });
  const DocTermMatrix dt = stage("tfidf", [&] { return build_docterm(triples, f.min_df, f.max_df_frac); });
  std::fprintf(stderr, "documents %lld terms %lld nnz %lld\n", static_cast<long long>(dt.stats.n_docs),
               static_cast<long long>(dt.stats.n_terms), static_cast<long long>(dt.X.nnz()));
  stage("write", [&] {
    write_matrix_market(dt.X, f.out);
    if (!f.out_vocab.empty()) write_vocabulary(f.out_vocab, dt.stats.terms);
    return 0;
  });
  return 0;
}

// ---- gram-stats ------------------------------------------------------------

struct GramFlags {
  std::string input;
  std::string normalize = "none";
  double dense_threshold = GramCache::kDefaultDenseThreshold;
};

int run_gram_stats(const GramFlags& f) {
  NormalizationMode mode{};
  try {
    mode = parse_normalization(f.normalize);
  } catch (const Error& e) {
    throw FlagError(e.what());
  }
  const SparseMatrix raw = stage("read", [&] { return read_matrix_market(f.input); });
  const SparseMatrix X = stage("normalize", [&] { return normalize_columns(raw, mode).X; });
  const GramCache C = stage("gram", [&] { return gram(X, f.dense_threshold); });
  std::printf("rows %lld\ncols %lld\nnnz_x %lld\nnnz_gram %lld\ndensity %.6g\nstorage %s\nfrob_sq %.17g\n",
              static_cast<long long>(X.rows()), static_cast<long long>(X.cols()),
              static_cast<long long>(X.nnz()), static_cast<long long>(C.nnz()), C.density(),
              C.is_dense() ? "dense" : "sparse", C.frob_sq());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separable NMF by conical-hull anchor selection (XRAY)"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads, 0 = one per hardware thread")
      ->capture_default_str();

  FactorizeFlags ff;
  auto* fac = app.add_subcommand("factorize", "Select anchors and solve for H");
  fac->add_option("--input", ff.input, "MatrixMarket coordinate file")->required();
  fac->add_option("--rank", ff.rank, "Number of anchors (cap for --auto-rank)");
  fac->add_option("--auto-rank", ff.auto_rank,
                  "Stop when an anchor improves the residual by less than this fraction");
  fac->add_option("--variant", ff.variant, "rand, max, dist or greedy")->capture_default_str();
  fac->add_option("--normalize", ff.normalize, "none, l1 or l2 column scaling")->capture_default_str();
  fac->add_option("--seed", ff.seed, "Seed for the rand variant")->capture_default_str();
  fac->add_option("--threads", threads, "Worker threads, 0 = one per hardware thread")->capture_default_str();
  fac->add_option("--tol", ff.tol, "NNLS per-column decrease threshold, relative to ||x_j||^2")
      ->capture_default_str();
  fac->add_option("--max-cycles", ff.max_cycles, "NNLS cycle cap for the final projection")
      ->capture_default_str();
  fac->add_option("--refine-iters", ff.refine_iters, "Alternating NNLS sweeps after selection")
      ->capture_default_str();
  fac->add_option("--out-anchors", ff.out_anchors, "Anchor report (default: standard output)");
  fac->add_option("--out-h", ff.out_h, "Write H as MatrixMarket");
  fac->add_option("--out-w", ff.out_w, "Write W (X_A, or refined W) as MatrixMarket");
  fac->add_option("--vocab", ff.vocab, "Vocabulary file from ingest, for anchor labels");

  SweepFlags sf;
  auto* sw = app.add_subcommand("sweep", "Recovery under noise on synthetic separable data");
  sw->add_option("--m", sf.m, "Rows")->capture_default_str();
  sw->add_option("--r", sf.r, "True anchors")->capture_default_str();
  sw->add_option("--n", sf.n, "Columns")->capture_default_str();
  sw->add_option("--deltas", sf.deltas, "lo:hi:step or a comma list")->capture_default_str();
  sw->add_option("--trials", sf.trials, "Trials per noise level")->capture_default_str();
  sw->add_option("--variants", sf.variants, "Comma list of variants")->capture_default_str();
  sw->add_option("--seed", sf.seed, "Master seed")->capture_default_str();
  sw->add_option("--threads", threads, "Worker threads, 0 = one per hardware thread")->capture_default_str();
  sw->add_option("--out", sf.out, "Per-run CSV (default: standard output)");
  sw->add_option("--out-summary", sf.out_summary, "Aggregated CSV (default: standard error)");
  sw->add_flag("--no-timing", sf.no_timing, "Write 0 in the seconds column");

  IngestFlags inf;
  auto* ing = app.add_subcommand("ingest", "Build a tf-idf document-term matrix");
  ing->add_option("--triples", inf.triples, "doc<TAB>term<TAB>count file")->required();
  ing->add_option("--min-df", inf.min_df, "Drop terms in fewer documents")->capture_default_str();
  ing->add_option("--max-df-frac", inf.max_df_frac, "Drop terms in a larger fraction of documents")
      ->capture_default_str();
  ing->add_option("--out", inf.out, "MatrixMarket output")->required();
  ing->add_option("--out-vocab", inf.out_vocab, "Vocabulary output");

  GramFlags gf;
  auto* gs = app.add_subcommand("gram-stats", "Report Gram matrix size and storage");
  gs->add_option("--input", gf.input, "MatrixMarket coordinate file")->required();
  gs->add_option("--normalize", gf.normalize, "none, l1 or l2")->capture_default_str();
  gs->add_option("--dense-threshold", gf.dense_threshold, "Density at which C is stored dense")
      ->capture_default_str();
  gs->add_option("--threads", threads, "Worker threads, 0 = one per hardware thread")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (threads < 0) throw FlagError("--threads must be >= 0");
    set_num_threads(threads);
    if (fac->parsed()) return run_factorize(ff);
    if (sw->parsed()) return run_sweep(sf);
    if (ing->parsed()) return run_ingest(inf);
    if (gs->parsed()) return run_gram_stats(gf);
  } catch (const FlagError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
