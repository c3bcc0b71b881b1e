#include "affdim/transversality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "affdim/dimension.hpp"

namespace affdim {

namespace {

void require_sign_definite(const Mat2& a) {
  if (!a.sign_definite()) {
    throw std::invalid_argument("sign-indefinite matrix");
  }
}

double denominator(const Mat2& a, double x) {
  return (std::abs(a.a) + std::abs(a.b)) * x + (std::abs(a.c) + std::abs(a.d)) * (1.0 - x);
}

// Empty when A ∈ 𝔐, otherwise the first failing condition.
std::string m_violation(const Mat2& a) {
  const MatrixClass c = classify_matrix(a);
  if (!c.sign_definite) {
    return "sign";
  }
  if (!(c.det_ratio > 0.0 && c.det_ratio < 0.5)) {
    return "det-ratio";
  }
  if (!(c.norm < 1.0)) {
    return "norm";
  }
  return {};
}

// Every A_i + tB_i with |t| ≤ radius stays in 𝔐 (checked on a grid including ±radius).
std::string box_violation(std::span<const Mat2> system, double radius) {
  constexpr int kGrid = 32;
  for (const Mat2& a : system) {
    const Mat2 b = perturbation_matrix(a);
    for (int g = -kGrid; g <= kGrid; ++g) {
      const double t = radius * static_cast<double>(g) / kGrid;
      std::string why = m_violation(a + b * t);
      if (!why.empty()) {
        return why;
      }
    }
  }
  return {};
}

}  // namespace

double s_map(const Mat2& a, double x) {
  require_sign_definite(a);
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("s_map: x must lie in [0, 1]");
  }
  return (std::abs(a.a) * x + std::abs(a.c) * (1.0 - x)) / denominator(a, x);
}

double s_map_derivative(const Mat2& a, double x) {
  require_sign_definite(a);
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("s_map_derivative: x must lie in [0, 1]");
  }
  const double d = denominator(a, x);
  return (std::abs(a.a) * std::abs(a.d) - std::abs(a.b) * std::abs(a.c)) / (d * d);
}

DerivativeRange derivative_range(const Mat2& a) {
  require_sign_definite(a);
  const double det = std::abs(a.det());
  const double inf_norm = a.norm_inf();
  const double row = a.min_row_sum();
  return {det / (inf_norm * inf_norm), det / (row * row)};
}

IntervalMapSystem::IntervalMapSystem(std::span<const Mat2> system, std::vector<double> shifts)
    : maps_(system.begin(), system.end()), shifts_(std::move(shifts)) {
  if (shifts_.empty()) {
    shifts_.assign(maps_.size(), 0.0);
  }
  if (shifts_.size() != maps_.size()) {
    throw std::invalid_argument("IntervalMapSystem: one shift per map required");
  }
  for (const Mat2& a : maps_) {
    ranges_.push_back(derivative_range(a));
  }
}

double IntervalMapSystem::contraction() const {
  double c = 0.0;
  for (const auto& r : ranges_) {
    c = std::max(c, r.sup);
  }
  return c;
}

double IntervalMapSystem::apply(std::size_t i, double x) const {
  // The rational map is evaluated directly so shifted images may leave [0, 1].
  const Mat2& a = maps_.at(i);
  return (std::abs(a.a) * x + std::abs(a.c) * (1.0 - x)) / denominator(a, x) + shifts_[i];
}

Mat2 perturbation_matrix(const Mat2& a) {
  const double top = a.a + a.b;
  const double bottom = a.c + a.d;
  return {top, -top, bottom, -bottom};
}

PerturbedSystem perturbation_family(std::span<const Mat2> system, std::span<const double> t) {
  if (t.size() != system.size()) {
    throw std::invalid_argument("perturbation_family: one parameter per matrix required");
  }
  PerturbedSystem out;
  for (std::size_t i = 0; i < system.size(); ++i) {
    require_sign_definite(system[i]);
    out.matrices.push_back(system[i] + perturbation_matrix(system[i]) * t[i]);
    const bool left = !m_violation(out.matrices.back()).empty();
    out.left_m.push_back(left);
    out.any_left_m = out.any_left_m || left;
  }
  return out;
}

Projection1d natural_projection_1d(const IntervalMapSystem& maps, std::span<const Symbol> word, std::size_t n,
                                   double seed) {
  if (n > word.size()) {
    throw std::invalid_argument("natural_projection_1d: depth exceeds word length");
  }
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (!(maps.range(i).sup < 1.0)) {
      std::ostringstream msg;
      msg << "non-contracting interval map " << i + 1;
      throw std::invalid_argument(msg.str());
    }
  }
  Projection1d out{seed, 1.0};
  for (std::size_t j = n; j-- > 0;) {
    out.value = maps.apply(word[j], out.value);
    out.error *= maps.range(word[j]).sup;
  }
  return out;
}

CrossCheck ess_vs_pi_crosscheck(std::span<const Mat2> system, const SplittingCertificate& cert, std::size_t depth,
                                std::size_t samples, std::mt19937_64& rng, std::size_t reference_extra) {
  const IntervalMapSystem maps(system);
  std::uniform_int_distribution<Symbol> pick(0, static_cast<Symbol>(system.size() - 1));
  CrossCheck out;
  out.depth = depth;
  Word w(depth + reference_extra);
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& sym : w) {
      sym = pick(rng);
    }
    const Projection1d pi = natural_projection_1d(maps, w, w.size());
    const ProjPoint line(Vec2{pi.value - 1.0, pi.value});
    const DirectionEstimate ess = strong_stable_direction(system, w, depth, cert);
    out.max_angle = std::max(out.max_angle, angle(line, ess.direction));
    // The angle of (x − 1, x) moves at rate 1/((x−1)² + x²) ≤ 2 in x.
    out.bound = std::max(out.bound, ess.error_bound + 2.0 * pi.error);
  }
  return out;
}

TransversalityCertificate certify_translation_transversality(std::span<const Mat2> system, std::mt19937_64& rng,
                                                             std::size_t pairs) {
  TransversalityCertificate cert;
  if (system.size() < 2) {
    cert.diagnostics = "needs at least two maps";
    return cert;
  }
  for (std::size_t i = 0; i < system.size(); ++i) {
    if (!system[i].sign_definite()) {
      std::ostringstream msg;
      msg << "matrix " << i + 1 << " is not sign-definite";
      cert.diagnostics = msg.str();
      return cert;
    }
  }
  const IntervalMapSystem maps(system);
  cert.contraction = maps.contraction();
  cert.derivative_lower_bound = 1.0 - cert.contraction / (1.0 - cert.contraction);

  bool base_in_m = true;
  for (std::size_t i = 0; i < system.size(); ++i) {
    const std::string why = m_violation(system[i]);
    if (!why.empty()) {
      base_in_m = false;
      std::ostringstream msg;
      msg << "matrix " << i + 1 << " is outside the class (" << why << "); ";
      cert.diagnostics += msg.str();
    }
  }

  if (base_in_m) {
    double lo = 0.0;
    double hi = 1.0;
    while (box_violation(system, hi).empty() && hi < 1e6) {
      lo = hi;
      hi *= 2.0;
    }
    for (int step = 0; step < 20; ++step) {
      const double mid = 0.5 * (lo + hi);
      if (box_violation(system, mid).empty()) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    cert.delta = lo;
    cert.binding_constraint = box_violation(system, hi);
  }

  if (cert.contraction < 0.5) {
    constexpr std::size_t kDepth = 60;
    constexpr double kStep = 1e-6;
    const std::size_t n = system.size();
    std::uniform_int_distribution<Symbol> pick(0, static_cast<Symbol>(n - 1));
    std::uniform_int_distribution<Symbol> offset(1, static_cast<Symbol>(n - 1));
    cert.measured_min_derivative = std::numeric_limits<double>::infinity();
    Word wi(kDepth);
    Word wj(kDepth);
    for (std::size_t p = 0; p < pairs; ++p) {
      for (std::size_t q = 0; q < kDepth; ++q) {
        wi[q] = pick(rng);
        wj[q] = pick(rng);
      }
      wj[0] = static_cast<Symbol>((wi[0] + offset(rng)) % n);
      auto gap_at = [&](double tau) {
        std::vector<double> shifts(n, 0.0);
        shifts[wi[0]] += tau;
        shifts[wj[0]] -= tau;
        const IntervalMapSystem moved(system, shifts);
        return natural_projection_1d(moved, wi, kDepth).value - natural_projection_1d(moved, wj, kDepth).value;
      };
      // (∂_{t_{i₀}} − ∂_{t_{j₀}})/2 of Π(i) − Π(j)
      const double derivative = (gap_at(kStep) - gap_at(-kStep)) / (2.0 * kStep) / 2.0;
      cert.measured_min_derivative = std::min(cert.measured_min_derivative, derivative);
      ++cert.pairs_checked;
    }
  } else {
    std::ostringstream msg;
    msg << "contraction " << cert.contraction << " is not below 1/2; ";
    cert.diagnostics += msg.str();
  }

  cert.certified = base_in_m && cert.contraction < 0.5 && cert.derivative_lower_bound > 0.0 &&
                   cert.measured_min_derivative >= cert.derivative_lower_bound - 1e-6;
  if (cert.certified) {
    cert.diagnostics += "certified by the half-contraction criterion";
  } else if (cert.diagnostics.empty()) {
    cert.diagnostics = "finite-difference derivative fell below the bound";
  }
  return cert;
}

}  // namespace affdim
