#include "affdim/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace affdim {

namespace {

void require_exponents(double h, double chi_s, double chi_ss) {
  if (!(chi_s > 0.0) || !(chi_ss >= chi_s)) {
    throw std::invalid_argument("exponents must satisfy 0 < chi_s <= chi_ss");
  }
  if (!(h >= 0.0)) {
    throw std::invalid_argument("entropy must be non-negative");
  }
}

}  // namespace

double lyapunov_dimension(double h, double chi_s, double chi_ss) {
  require_exponents(h, chi_s, chi_ss);
  if (h <= chi_s) {
    return h / chi_s;
  }
  return 1.0 + (h - chi_s) / chi_ss;
}

EssDimension ess_dimension(double h, double chi_s, double chi_ss, bool transversality_certified) {
  require_exponents(h, chi_s, chi_ss);
  if (chi_ss == chi_s) {
    throw std::domain_error("no domination gap");
  }
  return {std::min(1.0, h / (chi_ss - chi_s)), !transversality_certified};
}

double ledrappier_young(double h, double chi_s, double chi_ss, double dim_t) {
  require_exponents(h, chi_s, chi_ss);
  if (!(dim_t >= 0.0 && dim_t <= 1.0)) {
    throw std::invalid_argument("transversal dimension must lie in [0, 1]");
  }
  return h / chi_ss + (1.0 - chi_s / chi_ss) * dim_t;
}

double chain_value(double s0, double chi_s, double chi_ss) {
  const double rho = chi_s / chi_ss;
  return -3.0 + (2.0 + 1.0 / (1.0 - rho)) * s0 + 2.0 * rho;
}

MatrixClass classify_matrix(const Mat2& a) {
  MatrixClass c;
  c.sign_definite = a.sign_definite();
  const double row = a.min_row_sum();
  c.det_ratio = std::abs(a.det()) / (row * row);
  c.norm = op_norm(a);
  c.n_quantity = op_norm(a.inverse()) * c.norm * c.norm;
  c.in_m = c.sign_definite && c.det_ratio > 0.0 && c.det_ratio < 0.5 && c.norm < 1.0;
  c.n_inequality = c.n_quantity <= 1.0;
  c.in_n = c.in_m && c.n_inequality;
  return c;
}

ConditionFlags check_theorem_conditions(std::span<const Mat2> system, const ConditionInputs& in) {
  ConditionFlags f;
  f.system_in_m = !system.empty();
  f.system_in_n = !system.empty();
  f.n_inequality_all = !system.empty();
  for (const Mat2& a : system) {
    f.matrices.push_back(classify_matrix(a));
    f.system_in_m = f.system_in_m && f.matrices.back().in_m;
    f.system_in_n = f.system_in_n && f.matrices.back().in_n;
    f.n_inequality_all = f.n_inequality_all && f.matrices.back().n_inequality;
  }
  f.s0_above_five_thirds = in.s0 > 5.0 / 3.0;
  f.s0_above_three_halves = in.s0 > 1.5;
  f.in_o = f.system_in_m && f.s0_above_five_thirds;
  if (in.relaxed_bound) {
    f.in_o_relaxed = f.system_in_m && f.s0_above_three_halves;
  }
  if (in.chi_s > 0.0 && in.chi_ss > in.chi_s && in.h >= 0.0) {
    f.ess_ratio = in.h / (in.chi_ss - in.chi_s);
    f.ess_condition = f.ess_ratio >= std::min(1.0, in.h / in.chi_s) || f.ess_ratio + 2.0 * in.h / in.chi_ss > 2.0;
    const double ess = std::min(1.0, f.ess_ratio);
    const double ldim = lyapunov_dimension(in.h, in.chi_s, in.chi_ss);
    f.ldim_condition = ess >= std::min(1.0, ldim) || ess + ldim > 2.0;
    f.chain = chain_value(in.s0, in.chi_s, in.chi_ss);
    f.chain_above_two = f.chain > 2.0;
  }
  return f;
}

}  // namespace affdim
