#pragma once

// Locally constant potentials on the one-sided past, their transfer operators
// on k-cylinders, Gibbs measures, entropy and Lyapunov exponents.
//
// Words are pasts (i₋ₖ, …, i₋₁) stored oldest-first; the most recent symbol is
// the last entry. Unknown symbols further back are filled with symbol 0.

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "affdim/matrix_core.hpp"
#include "affdim/splitting.hpp"

namespace affdim {

class Potential {
 public:
  enum class Kind { kaenmaki, bernoulli, constant, custom };
  using Evaluator = std::function<double(std::span<const Symbol>)>;

  /// s·log‖A_{i₋₁}|e^s‖ for s ≤ 1, (s−1)·log|det A_{i₋₁}| + (2−s)·log‖A_{i₋₁}|e^s‖
  /// for 1 < s < 2, (s/2)·log|det A_{i₋₁}| for s ≥ 2; e^s of the earlier past.
  static Potential kaenmaki(std::span<const Mat2> system, const SplittingCertificate& cert, double s,
                            std::size_t tail_depth = 64);
  /// log p_{i₋₁}. Throws std::invalid_argument unless all weights are positive.
  static Potential bernoulli(std::vector<double> weights);
  static Potential constant(std::size_t alphabet, double value);
  static Potential custom(std::size_t alphabet, Evaluator fn);

  Kind kind() const { return kind_; }
  std::size_t alphabet() const { return alphabet_; }
  double parameter() const { return s_; }
  const std::vector<double>& weights() const { return weights_; }

  /// φ at a past whose known part is `past` (non-empty, oldest-first).
  double operator()(std::span<const Symbol> past) const;

 private:
  Kind kind_ = Kind::constant;
  std::size_t alphabet_ = 0;
  double s_ = 0.0;
  std::vector<double> weights_;
  Evaluator eval_;
};

/// Stable line of the past `tail ⊕ prefix`, with the tail the constant symbol 0.
class StableLineField {
 public:
  StableLineField(std::span<const Mat2> system, const SplittingCertificate& cert, std::size_t tail_depth = 64);
  ProjPoint operator()(std::span<const Symbol> prefix) const;

 private:
  std::vector<Mat2> system_;
  Vec2 tail_;
};

/// Transfer operator on depth-k cylinders. State w = (w₁, …, w_k) moves to
/// w′ = (w₂, …, w_k, j) with weight e^{φ(w′)}; all other entries vanish.
class TransferOperator {
 public:
  TransferOperator(const Potential& potential, std::size_t depth, std::size_t budget = std::size_t{1} << 16);

  std::size_t alphabet() const { return alphabet_; }
  std::size_t depth() const { return depth_; }
  std::size_t states() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }

  std::size_t successor(std::size_t state, Symbol next) const;
  std::size_t predecessor(std::size_t state, Symbol oldest) const;
  double entry(std::size_t from, std::size_t to) const;
  std::vector<std::vector<double>> to_dense() const;

  /// (L r)(w) = Σ_{w′} L(w, w′) r(w′)
  std::vector<double> apply(const std::vector<double>& r) const;
  /// (l L)(w′) = Σ_w l(w) L(w, w′)
  std::vector<double> apply_transpose(const std::vector<double>& l) const;

 private:
  std::size_t alphabet_;
  std::size_t depth_;
  std::size_t high_;  // N^{k−1}
  std::vector<double> weights_;
};

enum class MeasureSide { minus, plus };

struct CylinderMeasure {
  std::size_t depth = 0;
  std::size_t alphabet = 0;
  std::vector<double> masses;  // indexed by encode_word, oldest symbol most significant
  MeasureSide side = MeasureSide::minus;
  double pressure = 0.0;
  std::string order = "oldest-first";

  /// Masses of (depth−1)-words obtained by summing out the newest or the oldest symbol.
  CylinderMeasure marginal(bool drop_newest = true) const;
};

struct PowerIterationOptions {
  double tol = 1e-12;
  std::size_t max_iterations = 100000;
};

/// Gibbs measure of a depth-k locally constant potential: a Markov measure on
/// k-cylinders with transition w → w′ of probability L(w,w′) r(w′) / (λ r(w)).
class GibbsMeasure {
 public:
  /// Throws std::runtime_error if power iteration does not converge.
  GibbsMeasure(const TransferOperator& op, const PowerIterationOptions& opts = {});

  const CylinderMeasure& cylinders() const { return cylinders_; }
  double pressure() const { return std::log(lambda_); }
  double spectral_radius() const { return lambda_; }
  std::size_t iterations() const { return iterations_; }
  const std::vector<double>& right_vector() const { return right_; }
  const std::vector<double>& left_vector() const { return left_; }
  std::size_t alphabet() const { return op_.alphabet(); }
  std::size_t depth() const { return op_.depth(); }

  /// μ₋ of the cylinder of any non-empty word.
  double mass(std::span<const Symbol> word) const;
  /// Masses of every word of each length 1..max_len, index [len−1][encode_word].
  std::vector<std::vector<double>> masses_up_to(std::size_t max_len, std::size_t budget = std::size_t{1} << 22) const;

 private:
  TransferOperator op_;
  std::vector<double> right_;
  std::vector<double> left_;
  double lambda_ = 1.0;
  std::size_t iterations_ = 0;
  CylinderMeasure cylinders_;
  std::vector<CylinderMeasure> marginals_;  // index d−1: depth d ≤ k
};

struct GibbsCheck {
  double constant = 1.0;  // max of ratio and its inverse
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  std::size_t words = 0;
};

/// Ratio μ₋[w] / e^{−nP + Σ_{j=1}^{n} φ(w₁…w_j)} over `samples` random words of
/// length n_test (all of them when there are no more than `samples`).
GibbsCheck gibbs_constant_check(const GibbsMeasure& measure, const Potential& potential, std::size_t n_test,
                                std::size_t samples, std::mt19937_64& rng);

struct QuasiBernoulliCheck {
  double constant = 1.0;  // qb_C: max of μ₊[uv]/(μ₊[u]μ₊[v]) and its inverse
  std::size_t depth = 0;  // |uv|
  std::size_t pairs = 0;
};

/// Same mass table, re-tagged as a measure on forward words.
CylinderMeasure plus_side_measure(const CylinderMeasure& minus);

/// All splittings uv of all words of length `depth`.
QuasiBernoulliCheck quasi_bernoulli_check(const GibbsMeasure& measure, std::size_t depth,
                                          std::size_t budget = std::size_t{1} << 22);

struct LyapunovExponents {
  double chi_s = 0.0;
  double chi_ss = 0.0;
  double chi_s_words = 0.0;  // −(1/k) Σ μ[w] log α₁(A_w), A_w reversed product
  double chi_sum_words = 0.0;  // −(1/k) Σ μ[w] log|det A_w|
};

LyapunovExponents lyapunov_exponents(std::span<const Mat2> system, const GibbsMeasure& measure,
                                     const SplittingCertificate& cert, std::size_t tail_depth = 64);

struct EntropyEstimate {
  double h = 0.0;              // P − Σ μ[w] φ(w)
  double block_entropy = 0.0;  // −(1/k) Σ μ[w] log μ[w]
  double gap = 0.0;
};

EntropyEstimate entropy(const GibbsMeasure& measure, const Potential& potential);

std::size_t default_cylinder_depth(std::size_t alphabet);

struct ThermoReport {
  double pressure = 0.0;
  double h = 0.0;
  double chi_s = 0.0;
  double chi_ss = 0.0;
  double gibbs_constant = 0.0;       // words of length 2k
  double gibbs_constant_long = 0.0;  // words of length 4k, for stability in n
  double qb_constant = 0.0;
  double block_entropy_gap = 0.0;
  double chi_s_word_gap = 0.0;
  std::size_t depth = 0;
  std::vector<std::string> warnings;
};

struct ThermoOptions {
  std::size_t depth = 0;        // 0 → default_cylinder_depth
  std::size_t gibbs_samples = 200;
  std::size_t tail_depth = 64;
  PowerIterationOptions power{};
};

/// Gibbs measure of `potential` with all of its diagnostics.
ThermoReport thermo_report(std::span<const Mat2> system, const SplittingCertificate& cert, const Potential& potential,
                           const ThermoOptions& opts, std::mt19937_64& rng);

/// Käenmäki measure at parameter s with all of its diagnostics.
ThermoReport kaenmaki_report(std::span<const Mat2> system, const SplittingCertificate& cert, double s,
                             const ThermoOptions& opts, std::mt19937_64& rng);

}  // namespace affdim
