#pragma once

// Singular value function, finite-level subadditive pressure and the
// affinity dimension (root of the pressure).

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affdim/matrix_core.hpp"

namespace affdim {

inline constexpr std::size_t kDefaultWordBudget = std::size_t{1} << 24;

/// φˢ(A): α₁ˢ on [0,1], α₁α₂^{s−1} on (1,2], (α₁α₂)^{s/2} above 2.
/// Throws std::invalid_argument for s < 0.
double phi_s(const Mat2& m, double s);

/// log φˢ from precomputed log singular values.
double log_phi_s(double log_largest, double log_smallest, double s);

/// (1/n) log Σ_{|w|=n} φˢ(A_{w₁}···A_{wₙ}).
/// Throws std::length_error (with the required count) if Nⁿ > budget.
double finite_pressure(std::span<const Mat2> system, double s, std::size_t depth,
                       std::size_t budget = kDefaultWordBudget);

/// Log singular values of every depth-n forward product, in word-index order.
/// Lets the pressure be re-evaluated at many s without re-enumerating words.
class PressureSpectrum {
 public:
  PressureSpectrum(std::span<const Mat2> system, std::size_t depth,
                   std::size_t budget = kDefaultWordBudget);

  std::size_t depth() const { return depth_; }
  std::size_t alphabet() const { return alphabet_; }
  double pressure(double s) const;

 private:
  std::size_t depth_;
  std::size_t alphabet_;
  std::vector<double> log_largest_;
  std::vector<double> log_smallest_;
};

struct PressureCurve {
  std::size_t depth = 0;
  std::vector<std::pair<double, double>> samples;  // (s, P_n(s))
  double bracket_lo = 0.0;                          // last s with P_n > 0
  double bracket_hi = 0.0;                          // first s with P_n ≤ 0
  bool strictly_decreasing = true;
};

PressureCurve pressure_curve(std::span<const Mat2> system, std::size_t depth, std::span<const double> s_grid,
                             std::size_t budget = kDefaultWordBudget);

/// a_{n+m} − a_n − a_m with a_n = log Σ_{|w|=n} φˢ(A_w). Non-positive because φˢ
/// is submultiplicative; the returned value is the diagnostic slack.
double subadditivity_defect(std::span<const Mat2> system, double s, std::size_t n, std::size_t m,
                            std::size_t budget = kDefaultWordBudget);

struct AffinityDimensionOptions {
  std::size_t max_depth = 0;  // 0 → default (12, reduced so Nⁿ ≤ 2²⁴)
  double tol = 1e-4;          // stop once depth-to-depth root movement < tol
  double root_tol = 1e-12;    // bisection width at each depth
  std::size_t budget = kDefaultWordBudget;
};

struct AffinityDimension {
  double s0 = 0.0;
  double error_bound = 0.0;  // last depth-to-depth movement; not a rigorous enclosure
  std::size_t depth = 0;
  std::vector<double> roots_by_depth;  // index i holds the root at depth i+1
  bool clamped = false;
  std::vector<std::string> warnings;
};

std::size_t default_pressure_depth(std::size_t alphabet);

/// Root of the finite-level pressure at increasing depths.
/// Throws std::invalid_argument if some ‖A_i‖ ≥ 1 or the system is empty.
AffinityDimension affinity_dimension(std::span<const Mat2> system, const AffinityDimensionOptions& opts = {});

/// Bisection root of a decreasing function on [lo, hi] with f(lo) > 0 ≥ f(hi).
template <class F>
double bisect_decreasing(F&& f, double lo, double hi, double width) {
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace affdim
