#pragma once

#include "xray/detection.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace xray {

/// Controlled-noise separable data: X = W [I | H'] + N with W ~ U(0, 1),
/// columns of H' ~ Dirichlet(alpha), alpha ~ U(0, 1] drawn once per instance,
/// and N ~ Gaussian(0, delta^2). Columns 0..r_true-1 are the anchors.
struct SyntheticSpec {
  Index m = 200;
  Index r_true = 20;
  Index n = 210;
  double noise_delta = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticInstance {
  SparseMatrix X;  // every entry stored
  Eigen::MatrixXd W;
  Eigen::MatrixXd H;
  std::vector<Index> true_anchors;
};

SyntheticInstance gen_separable(const SyntheticSpec& spec);

/// |found ∩ truth| / |truth|.
double recovery_fraction(std::span<const Index> found, std::span<const Index> truth);

// splitmix64 mix of a master seed with two stream indices.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

struct SweepRun {
  double delta = 0.0;
  Criterion criterion = Criterion::kMax;
  int trial = 0;
  double recovery = 0.0;
  double final_residual = 0.0;  // ||X - X_A H||_F / ||X||_F
  double seconds = 0.0;
};

struct SweepSummary {
  double delta = 0.0;
  Criterion criterion = Criterion::kMax;
  double mean_recovery = 0.0;
  double std_recovery = 0.0;  // sample standard deviation, 0 for one trial
};

struct SweepResult {
  std::vector<double> deltas;
  std::vector<Criterion> criteria;
  int trials = 0;
  std::vector<SweepRun> runs;          // ordered by (delta, criterion, trial)
  std::vector<SweepSummary> summary;   // ordered by (delta, criterion)
};

/// For every (delta, trial) one instance is generated from
/// derive_seed(seed, delta index, trial) and shared by all criteria, so the
/// criteria are compared on identical data. rand draws its exterior points
/// from a further derived seed.
SweepResult noise_sweep(const SyntheticSpec& base, std::span<const double> deltas,
                        std::span<const Criterion> criteria, int trials);

// delta,criterion,trial,recovery,final_residual,seconds
void write_sweep_runs_csv(const SweepResult& result, std::ostream& os, bool with_timing = true);
// delta,criterion,mean_recovery,std_recovery
void write_sweep_summary_csv(const SweepResult& result, std::ostream& os);

/// Non-negative sparse count matrix shaped like a document-term corpus:
/// rows are documents, column popularity follows a Zipf law with the given
/// exponent, values are small positive counts. Roughly nnz_target entries.
SparseMatrix gen_sparse_corpus(Index m, Index n, Index nnz_target, double zipf_exponent,
                               std::uint64_t seed);

}  // namespace xray
