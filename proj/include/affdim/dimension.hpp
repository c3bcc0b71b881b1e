#pragma once

// Dimension formulas in terms of entropy and Lyapunov exponents, and the
// hypothesis checklists they depend on. Pure scalar functions.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affdim/matrix_core.hpp"

namespace affdim {

/// min{h/χˢ, 1 + (h − χˢ)/χˢˢ}. Throws std::invalid_argument unless
/// 0 < χˢ ≤ χˢˢ and h ≥ 0.
double lyapunov_dimension(double h, double chi_s, double chi_ss);

struct EssDimension {
  double value = 0.0;
  bool upper_bound_only = true;
};

/// min{1, h/(χˢˢ − χˢ)}; exact only with a transversality certificate.
/// Throws std::domain_error("no domination gap") when χˢˢ = χˢ.
EssDimension ess_dimension(double h, double chi_s, double chi_ss, bool transversality_certified = false);

/// h/χˢˢ + (1 − χˢ/χˢˢ)·dim_T: the local dimension H/χˢˢ along strong-stable
/// fibres plus (h − H)/χˢ = dim_T transversally.
/// Throws std::invalid_argument if dim_T ∉ [0, 1].
double ledrappier_young(double h, double chi_s, double chi_ss, double dim_t);

/// −3 + (2 + 1/(1 − ρ))·s₀ + 2ρ with ρ = χˢ/χˢˢ.
double chain_value(double s0, double chi_s, double chi_ss);

struct MatrixClass {
  bool sign_definite = false;
  double det_ratio = 0.0;     // |det A| / ⦀A⦀²
  double norm = 0.0;          // ‖A‖
  double n_quantity = 0.0;    // ‖A⁻¹‖·‖A‖²
  bool in_m = false;          // sign-definite, 0 < ratio < ½, ‖A‖ < 1
  bool n_inequality = false;  // ‖A⁻¹‖·‖A‖² ≤ 1
  bool in_n = false;          // in_m and n_inequality
};

MatrixClass classify_matrix(const Mat2& a);

struct ConditionInputs {
  double h = 0.0;
  double chi_s = 0.0;
  double chi_ss = 0.0;
  double s0 = 0.0;
  bool relaxed_bound = false;
};

struct ConditionFlags {
  std::vector<MatrixClass> matrices;
  bool system_in_m = false;
  bool system_in_n = false;
  bool n_inequality_all = false;
  bool in_o = false;          // in 𝔐ᴺ and s₀ > 5/3
  std::optional<bool> in_o_relaxed;  // in 𝔐ᴺ and s₀ > 3/2, when requested
  bool s0_above_five_thirds = false;
  bool s0_above_three_halves = false;
  double ess_ratio = 0.0;     // h/(χˢˢ − χˢ)
  bool ess_condition = false;          // h/(χˢˢ−χˢ) ≥ min{1, h/χˢ} or h/(χˢˢ−χˢ) + 2h/χˢˢ > 2
  bool ldim_condition = false;         // same shape, with the Lyapunov dimension of μ₋
  std::string ldim_interpretation = "ldim read as the Lyapunov dimension of the Gibbs measure on pasts";
  double chain = 0.0;
  bool chain_above_two = false;
};

ConditionFlags check_theorem_conditions(std::span<const Mat2> system, const ConditionInputs& in);

}  // namespace affdim
