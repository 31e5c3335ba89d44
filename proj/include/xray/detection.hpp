#pragma once

#include "xray/nnls.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace xray {

enum class Criterion { kRand, kMax, kDist, kGreedy };

std::string_view to_string(Criterion c);
// Accepts "rand", "max", "dist", "greedy".
Criterion parse_criterion(std::string_view name);

struct SelectionCriterion {
  Criterion kind = Criterion::kGreedy;
  std::uint64_t seed = 0;  // rand only
};

// Tie tolerance (relative), candidate denominator floor (relative to the
// mean |p^T x_j|) and the exterior threshold (relative to ||X||_F^2 / n).
inline constexpr double kTieTolerance = 1e-12;
inline constexpr double kDenomEps = 1e-12;
inline constexpr double kExteriorEps = 1e-10;

struct DetectionReport {
  Index chosen = -1;
  std::optional<Index> exterior;  // absent for greedy
  double score = 0.0;
  std::vector<Index> ties;  // every index within tie tolerance of the best score
};

using Mask = std::vector<char>;

// Columns admissible for the ratio rule: not yet selected and p^T x_j above
// the denominator floor.
Mask ratio_candidates(const GramCache& C, std::span<const Index> anchors);

// Columns admissible for greedy: not yet selected and non-zero.
Mask greedy_candidates(const GramCache& C, std::span<const Index> anchors);

/// Scores residual_row[j] / col_l1[j] for every column (masked entries are
/// -inf).
Eigen::VectorXd ratio_scores(const Eigen::VectorXd& residual_row,
                             const Eigen::VectorXd& col_l1, std::span<const char> mask);

/// Picks j* = argmax_j R_i^T x_j / p^T x_j over the mask. Ties within
/// kTieTolerance go to the smallest index. Throws Error when no candidate is
/// admissible.
DetectionReport score_ratio(const Eigen::VectorXd& residual_row, const Eigen::VectorXd& col_l1,
                          std::span<const char> mask);

// Columns k with ||R_k||^2 > kExteriorEps * frob_sq / n.
Mask exterior_points(const Eigen::VectorXd& res_norms_sq, double frob_sq);

/// ||(R_k^T X)_+||_2^2 for every k flagged in `rows`; other entries are 0.
/// Computed from C and the workspace without forming R.
Eigen::VectorXd dist_scores(const NnlsWorkspace& ws, const GramCache& C,
                            std::span<const char> rows);

/// Chooses the exterior point for rand, max or dist. Returns nullopt when no
/// column qualifies as exterior, which means the cone already covers the data.
/// `dist_supplier` is only invoked for dist.
std::optional<Index> pick_exterior(
    Criterion criterion, const Eigen::VectorXd& res_norms_sq, double frob_sq,
    const std::function<Eigen::VectorXd(std::span<const char>)>& dist_supplier,
    std::mt19937_64& rng);

/// sum_k max(0, (R^T X)(k, j))^2 / ||x_j||^2 for every masked-in column j
/// (others are -inf).
Eigen::VectorXd greedy_scores(const NnlsWorkspace& ws, const GramCache& C,
                              std::span<const char> mask);

DetectionReport greedy_select(const NnlsWorkspace& ws, const GramCache& C,
                              std::span<const char> mask);

// Shared argmax: smallest index among entries within kTieTolerance of the max.
DetectionReport argmax_with_ties(const Eigen::VectorXd& scores, std::span<const char> mask);

}  // namespace xray
