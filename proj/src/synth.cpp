#include "xray/synth.hpp"

#include "xray/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

namespace xray {

void SyntheticSpec::validate() const {
  if (m < 1) throw Error("synthetic m must be >= 1");
  if (r_true < 1) throw Error("synthetic r must be >= 1");
  if (n < r_true) throw Error("synthetic n must be >= r");
  if (!(noise_delta >= 0.0)) throw Error("noise delta must be >= 0");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

SyntheticInstance gen_separable(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticInstance out;
  out.W.resize(spec.m, spec.r_true);
  for (Index k = 0; k < spec.r_true; ++k)
    for (Index i = 0; i < spec.m; ++i) out.W(i, k) = unit(rng);

  // alpha in (0, 1]: 1 - U[0, 1).
  std::vector<double> alpha(static_cast<std::size_t>(spec.r_true));
  for (auto& a : alpha) a = 1.0 - unit(rng);

  out.H = Eigen::MatrixXd::Zero(spec.r_true, spec.n);
  out.H.leftCols(spec.r_true).setIdentity();
  std::vector<std::gamma_distribution<double>> gammas;
  for (double a : alpha) gammas.emplace_back(a, 1.0);
  for (Index j = spec.r_true; j < spec.n; ++j) {
    double total = 0.0;
    for (Index k = 0; k < spec.r_true; ++k) {
      out.H(k, j) = gammas[static_cast<std::size_t>(k)](rng);
      total += out.H(k, j);
    }
    if (total > 0.0) {
      out.H.col(j) /= total;
    } else {
      // Every draw underflowed; put the mass on one uniformly chosen anchor.
      std::uniform_int_distribution<Index> pick(0, spec.r_true - 1);
      out.H(pick(rng), j) = 1.0;
    }
  }

  Eigen::MatrixXd X(spec.m, spec.n);
  X.leftCols(spec.r_true) = out.W;
  X.rightCols(spec.n - spec.r_true) = out.W * out.H.rightCols(spec.n - spec.r_true);
  if (spec.noise_delta > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_delta);
    for (Index j = 0; j < spec.n; ++j)
      for (Index i = 0; i < spec.m; ++i) X(i, j) += noise(rng);
  }
  out.X = SparseMatrix::from_dense(X);
  out.true_anchors.resize(static_cast<std::size_t>(spec.r_true));
  for (Index k = 0; k < spec.r_true; ++k) out.true_anchors[static_cast<std::size_t>(k)] = k;
  return out;
}

double recovery_fraction(std::span<const Index> found, std::span<const Index> truth) {
  if (truth.empty()) return 0.0;
  std::vector<Index> a(found.begin(), found.end());
  std::vector<Index> b(truth.begin(), truth.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  std::vector<Index> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(b.size());
}

SweepResult noise_sweep(const SyntheticSpec& base, std::span<const double> deltas,
                        std::span<const Criterion> criteria, int trials) {
  if (trials < 1) throw Error("trials must be >= 1");
  base.validate();
  for (double d : deltas)
    if (!(d >= 0.0)) throw Error("noise delta must be >= 0");

  SweepResult out;
  out.deltas.assign(deltas.begin(), deltas.end());
  out.criteria.assign(criteria.begin(), criteria.end());
  out.trials = trials;

  const auto nd = static_cast<Index>(deltas.size());
  const auto nc = static_cast<Index>(criteria.size());
  out.runs.resize(static_cast<std::size_t>(nd * nc * trials));

  const Index cells = nd * trials;
  std::vector<std::string> errors(static_cast<std::size_t>(cells));
#pragma omp parallel for schedule(dynamic, 1)
  for (Index cell = 0; cell < cells; ++cell) {
    const Index d = cell / trials;
    const int t = static_cast<int>(cell % trials);
    try {
      SyntheticSpec spec = base;
      spec.noise_delta = deltas[static_cast<std::size_t>(d)];
      spec.seed = derive_seed(base.seed, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(t));
      const SyntheticInstance inst = gen_separable(spec);
      const GramCache C = gram(inst.X);
      for (Index c = 0; c < nc; ++c) {
        XrayConfig config;
        config.rank = spec.r_true;
        config.criterion = {criteria[static_cast<std::size_t>(c)],
                            derive_seed(spec.seed, 0x72616e64ULL, static_cast<std::uint64_t>(c))};
        const auto start = std::chrono::steady_clock::now();
        const XrayResult res = xray_run(C, config);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        SweepRun& run = out.runs[static_cast<std::size_t>((d * nc + c) * trials + t)];
        run.delta = spec.noise_delta;
        run.criterion = criteria[static_cast<std::size_t>(c)];
        run.trial = t;
        run.recovery = recovery_fraction(res.anchors, inst.true_anchors);
        run.final_residual =
            res.residual_history.empty() ? 1.0
                                         : std::sqrt(res.residual_history.back() / C.frob_sq());
        run.seconds = secs;
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(cell)] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error("sweep run failed: " + e);

  for (Index d = 0; d < nd; ++d) {
    for (Index c = 0; c < nc; ++c) {
      double sum = 0.0;
      for (int t = 0; t < trials; ++t)
        sum += out.runs[static_cast<std::size_t>((d * nc + c) * trials + t)].recovery;
      const double mean = sum / trials;
      double ss = 0.0;
      for (int t = 0; t < trials; ++t) {
        const double v = out.runs[static_cast<std::size_t>((d * nc + c) * trials + t)].recovery - mean;
        ss += v * v;
      }
      const double sd = trials > 1 ? std::sqrt(ss / (trials - 1)) : 0.0;
      out.summary.push_back({deltas[static_cast<std::size_t>(d)],
                             criteria[static_cast<std::size_t>(c)], mean, sd});
    }
  }
  return out;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_sweep_runs_csv(const SweepResult& result, std::ostream& os, bool with_timing) {
  os << "delta,criterion,trial,recovery,final_residual,seconds\n";
  for (const auto& run : result.runs) {
    os << fmt_double(run.delta) << ',' << to_string(run.criterion) << ',' << run.trial << ','
       << fmt_double(run.recovery) << ',' << fmt_double(run.final_residual) << ','
       << fmt_double(with_timing ? run.seconds : 0.0) << '\n';
  }
}

void write_sweep_summary_csv(const SweepResult& result, std::ostream& os) {
  os << "delta,criterion,mean_recovery,std_recovery\n";
  for (const auto& s : result.summary) {
    os << fmt_double(s.delta) << ',' << to_string(s.criterion) << ','
       << fmt_double(s.mean_recovery) << ',' << fmt_double(s.std_recovery) << '\n';
  }
}

SparseMatrix gen_sparse_corpus(Index m, Index n, Index nnz_target, double zipf_exponent,
                               std::uint64_t seed) {
  if (m < 1 || n < 1 || nnz_target < 0) throw Error("invalid corpus dimensions");
  std::mt19937_64 rng(seed);
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j)
    weights[static_cast<std::size_t>(j)] = 1.0 / std::pow(static_cast<double>(j + 1), zipf_exponent);
  // Shuffle popularity over column ids so that frequent terms are scattered.
  std::shuffle(weights.begin(), weights.end(), rng);
  std::discrete_distribution<Index> term(weights.begin(), weights.end());
  std::uniform_int_distribution<Index> doc(0, m - 1);
  std::uniform_int_distribution<int> count(1, 3);

  std::vector<Triple> triples;
  triples.reserve(static_cast<std::size_t>(nnz_target));
  for (Index e = 0; e < nnz_target; ++e)
    triples.push_back({doc(rng), term(rng), static_cast<double>(count(rng))});
  // Every column gets at least one entry so no candidate is degenerate.
  for (Index j = 0; j < n; ++j) triples.push_back({doc(rng), j, 1.0});
  return SparseMatrix::from_triples(triples, m, n);
}

}  // namespace xray
