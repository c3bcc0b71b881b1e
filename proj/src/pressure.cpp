#include "affdim/pressure.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace affdim {

namespace {

constexpr std::size_t kParallelThreshold = std::size_t{1} << 15;

// Streaming log-sum-exp accumulator.
struct LogSum {
  double max = -std::numeric_limits<double>::infinity();
  double acc = 0.0;

  void add(double l) {
    if (l == -std::numeric_limits<double>::infinity()) {
      return;
    }
    if (l > max) {
      acc = acc * std::exp(max - l) + 1.0;
      max = l;
    } else {
      acc += std::exp(l - max);
    }
  }
  void merge(const LogSum& o) {
    if (o.acc == 0.0) {
      return;
    }
    if (o.max > max) {
      acc = acc * std::exp(max - o.max) + o.acc;
      max = o.max;
    } else {
      acc += o.acc * std::exp(o.max - max);
    }
  }
  double value() const { return acc == 0.0 ? -std::numeric_limits<double>::infinity() : max + std::log(acc); }
};

// Runs fn(first_symbol) for every symbol, concurrently when the word space is large.
// Results come back in symbol order so reductions are deterministic.
template <class Fn>
auto split_first_symbol(std::size_t alphabet, std::size_t words, Fn&& fn) {
  using R = decltype(fn(Symbol{0}));
  std::vector<R> out;
  out.reserve(alphabet);
  if (words < kParallelThreshold || alphabet < 2) {
    for (Symbol s = 0; s < alphabet; ++s) {
      out.push_back(fn(s));
    }
    return out;
  }
  std::vector<std::future<R>> jobs;
  for (Symbol s = 0; s < alphabet; ++s) {
    jobs.push_back(std::async(std::launch::async, [&fn, s] { return fn(s); }));
  }
  for (auto& j : jobs) {
    out.push_back(j.get());
  }
  return out;
}

double log_sum_phi(std::span<const Mat2> system, double s, std::size_t depth, std::size_t budget) {
  const std::size_t words = word_count_checked(system.size(), depth, budget);
  auto partials = split_first_symbol(system.size(), words, [&](Symbol first) {
    LogSum sum;
    for_each_word_product(
        system, depth, ProductOrder::forward,
        [&](std::size_t, const Mat2& product, double det) {
          const SingularValues sv = singular_values(product, det);
          sum.add(log_phi_s(std::log(sv.largest), std::log(sv.smallest), s));
        },
        first);
    return sum;
  });
  LogSum total;
  for (const auto& p : partials) {
    total.merge(p);
  }
  return total.value();
}

}  // namespace

double log_phi_s(double log_largest, double log_smallest, double s) {
  if (s <= 1.0) {
    return s * log_largest;
  }
  if (s <= 2.0) {
    return log_largest + (s - 1.0) * log_smallest;
  }
  return 0.5 * s * (log_largest + log_smallest);
}

double phi_s(const Mat2& m, double s) {
  if (!(s >= 0.0)) {
    throw std::invalid_argument("phi_s: s must be non-negative");
  }
  if (s == 0.0) {
    return 1.0;
  }
  const SingularValues sv = singular_values(m);
  if (s <= 1.0) {
    return std::pow(sv.largest, s);
  }
  if (s <= 2.0) {
    return sv.largest * std::pow(sv.smallest, s - 1.0);
  }
  return std::pow(sv.largest * sv.smallest, 0.5 * s);
}

double finite_pressure(std::span<const Mat2> system, double s, std::size_t depth, std::size_t budget) {
  if (depth == 0) {
    throw std::invalid_argument("finite_pressure: depth must be at least 1");
  }
  if (!(s >= 0.0)) {
    throw std::invalid_argument("finite_pressure: s must be non-negative");
  }
  return log_sum_phi(system, s, depth, budget) / static_cast<double>(depth);
}

PressureSpectrum::PressureSpectrum(std::span<const Mat2> system, std::size_t depth, std::size_t budget)
    : depth_(depth), alphabet_(system.size()) {
  if (depth == 0) {
    throw std::invalid_argument("PressureSpectrum: depth must be at least 1");
  }
  const std::size_t words = word_count_checked(system.size(), depth, budget);
  log_largest_.resize(words);
  log_smallest_.resize(words);
  split_first_symbol(system.size(), words, [&](Symbol first) {
    for_each_word_product(
        system, depth, ProductOrder::forward,
        [&](std::size_t index, const Mat2& product, double det) {
          const SingularValues sv = singular_values(product, det);
          log_largest_[index] = std::log(sv.largest);
          log_smallest_[index] = std::log(sv.smallest);
        },
        first);
    return 0;
  });
}

double PressureSpectrum::pressure(double s) const {
  LogSum sum;
  for (std::size_t i = 0; i < log_largest_.size(); ++i) {
    sum.add(log_phi_s(log_largest_[i], log_smallest_[i], s));
  }
  return sum.value() / static_cast<double>(depth_);
}

PressureCurve pressure_curve(std::span<const Mat2> system, std::size_t depth, std::span<const double> s_grid,
                             std::size_t budget) {
  PressureSpectrum spectrum(system, depth, budget);
  PressureCurve curve;
  curve.depth = depth;
  bool found_hi = false;
  for (double s : s_grid) {
    if (!(s >= 0.0)) {
      throw std::invalid_argument("pressure_curve: s must be non-negative");
    }
    const double p = spectrum.pressure(s);
    if (!curve.samples.empty()) {
      const auto& [prev_s, prev_p] = curve.samples.back();
      if (s > prev_s && !(p < prev_p)) {
        curve.strictly_decreasing = false;
      }
    }
    curve.samples.emplace_back(s, p);
    if (p > 0.0) {
      curve.bracket_lo = s;
    } else if (!found_hi) {
      curve.bracket_hi = s;
      found_hi = true;
    }
  }
  if (!found_hi && !curve.samples.empty()) {
    curve.bracket_hi = curve.samples.back().first;
  }
  return curve;
}

double subadditivity_defect(std::span<const Mat2> system, double s, std::size_t n, std::size_t m,
                            std::size_t budget) {
  return log_sum_phi(system, s, n + m, budget) - log_sum_phi(system, s, n, budget) -
         log_sum_phi(system, s, m, budget);
}

std::size_t default_pressure_depth(std::size_t alphabet) {
  std::size_t depth = 12;
  while (depth > 1 && std::pow(static_cast<double>(alphabet), static_cast<double>(depth)) >
                          static_cast<double>(kDefaultWordBudget)) {
    --depth;
  }
  return depth;
}

AffinityDimension affinity_dimension(std::span<const Mat2> system, const AffinityDimensionOptions& opts) {
  if (system.empty()) {
    throw std::invalid_argument("affinity_dimension: empty system");
  }
  for (std::size_t i = 0; i < system.size(); ++i) {
    const double norm = op_norm(system[i]);
    if (!(norm < 1.0)) {
      std::ostringstream msg;
      msg << "non-contracting matrix " << i + 1 << " (norm " << norm << ")";
      throw std::invalid_argument(msg.str());
    }
  }
  AffinityDimension result;
  const std::size_t max_depth = opts.max_depth == 0 ? default_pressure_depth(system.size()) : opts.max_depth;
  bool warned_bracket = false;
  double prev = std::numeric_limits<double>::quiet_NaN();
  result.error_bound = std::numeric_limits<double>::infinity();

  for (std::size_t depth = 1; depth <= max_depth; ++depth) {
    const PressureSpectrum spectrum(system, depth, opts.budget);
    auto p = [&](double s) { return spectrum.pressure(s); };
    double root = 0.0;
    if (p(0.0) > 0.0) {
      double hi = 2.0;
      while (p(hi) > 0.0) {
        if (!warned_bracket) {
          std::ostringstream msg;
          msg << "P_" << depth << "(2) > 0; root bracket extended beyond 2";
          result.warnings.push_back(msg.str());
          warned_bracket = true;
        }
        hi *= 2.0;
      }
      root = bisect_decreasing(p, 0.0, hi, opts.root_tol);
    }
    result.roots_by_depth.push_back(root);
    result.depth = depth;
    if (depth > 1) {
      result.error_bound = std::abs(root - prev);
    }
    prev = root;
    if (depth > 1 && result.error_bound < opts.tol) {
      break;
    }
  }
  result.s0 = result.roots_by_depth.back();
  if (result.s0 > 2.0) {
    result.clamped = true;
    result.warnings.push_back("pressure root exceeds 2; clamped to 2");
    result.s0 = 2.0;
  }
  return result;
}

}  // namespace affdim
