#pragma once

// Dominated splitting: backward-invariant cones on 𝐏¹, the stable and
// strong-stable line fields they induce, and the domination exponent.

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "affdim/matrix_core.hpp"

namespace affdim {

/// Closed projective interval: the lines at angles lo + t, t ∈ [0, width], mod π.
struct ProjInterval {
  double lo = 0.0;
  double width = 0.0;

  double hi() const { return wrap_projective(lo + width); }
  double bisector() const { return wrap_projective(lo + 0.5 * width); }
  /// (θ − lo) mod π, in [0, π).
  double offset(double theta) const { return wrap_projective(theta - lo); }
  bool contains(double theta) const { return offset(theta) <= width; }
  /// The closure of the complement, as an interval starting at hi().
  ProjInterval complement() const { return {hi(), std::numbers::pi - width}; }
};

/// Image of a projective interval under a non-singular linear map. Endpoints map
/// to endpoints; the sign of det decides the orientation.
ProjInterval image_interval(const Mat2& m, const ProjInterval& interval);
/// Same, with det m supplied (its sign is all that is used).
ProjInterval image_interval(const Mat2& m, const ProjInterval& interval, double det);

/// Smallest arc containing all the given arcs (complement of the largest gap).
/// Returns nullopt when the arcs cover all of 𝐏¹.
std::optional<ProjInterval> projective_hull(std::span<const ProjInterval> arcs);

/// A single cone on 𝐏¹; multicones with more than one component are not supported.
struct Cone {
  ProjInterval interval;
};

/// Minimum over the system of the projective distance from A⁻¹(M) to ∂M.
/// Non-positive when ∪A⁻¹(M) ⊄ M°.
double backward_invariance_margin(std::span<const Mat2> system, const Cone& cone);

/// Same check on `samples` equally spaced lines of M (endpoints included).
double sampled_invariance_margin(std::span<const Mat2> system, const Cone& cone, std::size_t samples);

struct DominationEstimate {
  double beta = 0.0;      // per-symbol log units
  double constant = 0.0;  // C_est = exp(intercept)
  std::vector<double> min_log_ratio;  // mₙ, index n−1
  bool no_domination = false;
  std::vector<std::string> warnings;
};

/// mₙ = min_{|w|=n} log(α₁(A_w)/α₂(A_w)); β̂ is the least-squares slope of mₙ
/// over n ∈ [⌈n_max/2⌉, n_max]. Throws std::length_error past the budget.
DominationEstimate estimate_domination(std::span<const Mat2> system, std::size_t n_max,
                                       std::size_t budget = std::size_t{1} << 22);

std::size_t default_domination_depth(std::size_t alphabet);

struct SplittingCertificate {
  Cone cone;
  double margin = 0.0;
  double beta = 0.0;
  double gap_constant = 0.0;  // C_gap: direction error ≤ C_gap·e^{−β̂n}
  DominationEstimate domination;
  std::string method;  // "sign-definite quadrant" or "hull iteration"

  bool valid() const { return margin > 0.0 && beta > 0.0; }
  double error_bound(std::size_t depth) const;
};

struct SplittingSearch {
  std::optional<SplittingCertificate> certificate;
  std::string diagnostics;
};

struct SplittingOptions {
  std::size_t refinement_rounds = 64;
  std::size_t boundary_samples = 4096;
  std::size_t domination_depth = 0;  // 0 → default_domination_depth
  std::size_t gap_depth = 10;
  std::size_t budget = std::size_t{1} << 22;
};

/// Searches for a single backward-invariant cone. Failure is "undetermined":
/// it does not prove that the system has no dominated splitting.
SplittingSearch find_backward_invariant_multicone(std::span<const Mat2> system, const SplittingOptions& opts = {});

enum class Seed { bisector, lower_boundary, upper_boundary };

struct DirectionEstimate {
  ProjPoint direction;
  double error_bound = 0.0;
};

/// e^{ss}(i₊) ≈ A_{i₀}⁻¹···A_{i_{n−1}}⁻¹(seed line of M), using word[0..depth).
/// Throws std::invalid_argument for an invalid certificate or depth > |word|.
DirectionEstimate strong_stable_direction(std::span<const Mat2> system, std::span<const Symbol> word,
                                          std::size_t depth, const SplittingCertificate& cert,
                                          Seed seed = Seed::bisector);

/// e^{s}(i₋) ≈ A_{i₋₁}···A_{i₋ₙ}(seed line of the closed complement of M).
/// `word` is the past stored oldest-first (i₋ₘ, …, i₋₁); its last `depth`
/// symbols are used.
DirectionEstimate stable_direction(std::span<const Mat2> system, std::span<const Symbol> word, std::size_t depth,
                                   const SplittingCertificate& cert, Seed seed = Seed::bisector);

struct HolderReport {
  std::vector<double> max_angle_by_agreement;  // index k = common prefix length
  double fitted_constant = 0.0;                // C_fit
  double slope = 0.0;                          // regression of log max angle on k (k ≥ 1)
  bool passed = false;
};

/// Random pairs of depth-n words sharing exactly k leading symbols, k = 0..⌊n/2⌋.
HolderReport holder_direction_check(std::span<const Mat2> system, const SplittingCertificate& cert,
                                    std::size_t depth, std::size_t samples, std::mt19937_64& rng);

/// Least-squares fit y ≈ slope·x + intercept.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace affdim
