#pragma once

// Interval maps induced by sign-definite matrices on the lines of the
// second/fourth quadrant, the translation family A + tB, and the
// transversality certificate built on them.

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "affdim/matrix_core.hpp"
#include "affdim/splitting.hpp"

namespace affdim {

/// S(x, A) = (|a|x + |c|(1−x)) / ((|a|+|b|)x + (|c|+|d|)(1−x)).
/// Throws std::invalid_argument for a sign-indefinite matrix or x ∉ [0, 1].
double s_map(const Mat2& a, double x);
/// S′(x, A) = (|a||d| − |b||c|) / D(x)².
double s_map_derivative(const Mat2& a, double x);

struct DerivativeRange {
  double inf = 0.0;  // |det A| / ‖A‖∞²
  double sup = 0.0;  // |det A| / ⦀A⦀²
};
DerivativeRange derivative_range(const Mat2& a);

class IntervalMapSystem {
 public:
  /// Throws std::invalid_argument if some matrix is not sign-definite.
  explicit IntervalMapSystem(std::span<const Mat2> system, std::vector<double> shifts = {});

  std::size_t size() const { return maps_.size(); }
  const Mat2& matrix(std::size_t i) const { return maps_[i]; }
  const DerivativeRange& range(std::size_t i) const { return ranges_[i]; }
  /// max_i sup|S_i′|
  double contraction() const;
  /// S_i(x) + t_i
  double apply(std::size_t i, double x) const;

 private:
  std::vector<Mat2> maps_;
  std::vector<DerivativeRange> ranges_;
  std::vector<double> shifts_;
};

/// B = [[a+b, −(a+b)], [c+d, −(c+d)]]
Mat2 perturbation_matrix(const Mat2& a);

struct PerturbedSystem {
  std::vector<Mat2> matrices;
  std::vector<bool> left_m;  // A_i + t_iB_i outside 𝔐
  bool any_left_m = false;
};

PerturbedSystem perturbation_family(std::span<const Mat2> system, std::span<const double> t);

struct Projection1d {
  double value = 0.0;
  double error = 0.0;  // ∏ sup|S′| over the word
};

/// S_{w₁} ∘ … ∘ S_{wₙ}(seed) using the first n symbols of the word.
/// Throws std::invalid_argument if some map is not contracting.
Projection1d natural_projection_1d(const IntervalMapSystem& maps, std::span<const Symbol> word, std::size_t n,
                                   double seed = 0.5);

struct CrossCheck {
  double max_angle = 0.0;
  double bound = 0.0;  // C_gap·e^{−β̂n} plus the angular error of the reference Π
  std::size_t depth = 0;
};

/// Angle between e^{ss} at depth n and the line spanned by (Π − 1, Π), with Π
/// taken at depth n + reference_extra, over random words.
CrossCheck ess_vs_pi_crosscheck(std::span<const Mat2> system, const SplittingCertificate& cert, std::size_t depth,
                                std::size_t samples, std::mt19937_64& rng, std::size_t reference_extra = 48);

struct TransversalityCertificate {
  bool certified = false;
  double contraction = 0.0;             // c = max sup|S′|
  double derivative_lower_bound = 0.0;  // 1 − c/(1 − c)
  double measured_min_derivative = 0.0;
  std::size_t pairs_checked = 0;
  double delta = 0.0;
  std::string binding_constraint;  // which 𝔐 condition fails just beyond δ
  std::string diagnostics;
};

/// Half-contraction criterion for the translation family, checked by finite
/// differences on `pairs` random word pairs; δ is bisected over the box radius.
TransversalityCertificate certify_translation_transversality(std::span<const Mat2> system, std::mt19937_64& rng,
                                                             std::size_t pairs = 100);

}  // namespace affdim
