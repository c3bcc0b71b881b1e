#include "affdim/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace affdim {

namespace {

constexpr double kPi = std::numbers::pi;

// Signed distance of a line from the boundary of an interval: positive inside.
double signed_depth(const ProjInterval& interval, double theta) {
  const double off = interval.offset(theta);
  if (off <= interval.width) {
    return std::min(off, interval.width - off);
  }
  return -std::min(kPi - off, off - interval.width);
}

ProjPoint seed_line(const ProjInterval& interval, Seed seed) {
  switch (seed) {
    case Seed::lower_boundary:
      return ProjPoint::from_angle(interval.lo);
    case Seed::upper_boundary:
      return ProjPoint::from_angle(interval.hi());
    case Seed::bisector:
      break;
  }
  return ProjPoint::from_angle(interval.bisector());
}

void require_valid(const SplittingCertificate& cert) {
  if (!cert.valid()) {
    throw std::invalid_argument("invalid splitting certificate");
  }
}

// Angle of the top left-singular direction of A.
double top_left_singular_angle(const Mat2& m) {
  const double p = m.a * m.a + m.b * m.b;
  const double q = m.a * m.c + m.b * m.d;
  const double r = m.c * m.c + m.d * m.d;
  return wrap_projective(0.5 * std::atan2(2.0 * q, p - r));
}

std::size_t max_depth_within(std::size_t alphabet, std::size_t depth, std::size_t budget) {
  while (depth > 0 && std::pow(static_cast<double>(alphabet), static_cast<double>(depth)) > budget) {
    --depth;
  }
  return depth;
}

double gap_constant(std::span<const Mat2> system, const Cone& cone, double beta, std::size_t depth) {
  std::vector<Mat2> inverses;
  inverses.reserve(system.size());
  for (const Mat2& m : system) {
    inverses.push_back(m.inverse());
  }
  const ProjInterval& m_int = cone.interval;
  const ProjInterval complement = m_int.complement();
  double c = std::max(m_int.width, complement.width);
  visit_word_tree(inverses, depth, ProductOrder::forward, [&](std::size_t level, std::size_t, const Mat2& b, double det) {
    const double w = image_interval(b, m_int, det).width;
    c = std::max(c, w * std::exp(beta * static_cast<double>(level)));
  });
  visit_word_tree(system, depth, ProductOrder::forward, [&](std::size_t level, std::size_t, const Mat2& a, double det) {
    const double w = image_interval(a, complement, det).width;
    c = std::max(c, w * std::exp(beta * static_cast<double>(level)));
  });
  return c;
}

}  // namespace

ProjInterval image_interval(const Mat2& m, const ProjInterval& interval) {
  return image_interval(m, interval, m.det());
}

ProjInterval image_interval(const Mat2& m, const ProjInterval& interval, double det) {
  // Linear maps act on 𝐏¹ as homeomorphisms, orientation-preserving iff det > 0.
  const double t_lo = ProjPoint(m * ProjPoint::from_angle(interval.lo).unit()).theta();
  const double t_hi = ProjPoint(m * ProjPoint::from_angle(interval.hi()).unit()).theta();
  ProjInterval out = det > 0.0 ? ProjInterval{t_lo, wrap_projective(t_hi - t_lo)}
                                   : ProjInterval{t_hi, wrap_projective(t_lo - t_hi)};
  // A (numerically) degenerate source can round to an almost-full arc.
  if (out.width > kPi - 1e-9 && interval.width < kPi - 1e-9) {
    out.width = 0.0;
  }
  return out;
}

std::optional<ProjInterval> projective_hull(std::span<const ProjInterval> arcs) {
  if (arcs.empty()) {
    throw std::invalid_argument("projective_hull: no arcs");
  }
  std::vector<std::pair<double, double>> spans;
  spans.reserve(arcs.size());
  for (const auto& arc : arcs) {
    const double s = wrap_projective(arc.lo);
    spans.emplace_back(s, s + arc.width);
  }
  std::sort(spans.begin(), spans.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& sp : spans) {
    if (!merged.empty() && sp.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, sp.second);
    } else {
      merged.push_back(sp);
    }
  }
  // Only the last merged arc can run past π and wrap onto the first ones.
  const double wrapped_end = merged.back().second - kPi;
  double best_gap = -1.0;
  double best_end = 0.0;
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    const double start = std::max(merged[i].second, wrapped_end);
    const double gap = merged[i + 1].first - start;
    if (gap > best_gap) {
      best_gap = gap;
      best_end = merged[i + 1].first;
    }
  }
  const double wrap_gap = merged.front().first + kPi - merged.back().second;
  if (wrap_gap > best_gap) {
    best_gap = wrap_gap;
    best_end = merged.front().first;
  }
  if (best_gap <= 0.0) {
    return std::nullopt;
  }
  return ProjInterval{wrap_projective(best_end), kPi - best_gap};
}

double backward_invariance_margin(std::span<const Mat2> system, const Cone& cone) {
  const ProjInterval& m_int = cone.interval;
  double margin = std::numeric_limits<double>::infinity();
  for (const Mat2& a : system) {
    const ProjInterval img = image_interval(a.inverse(), m_int);
    const double start = m_int.offset(img.lo);
    if (start > m_int.width) {
      margin = std::min(margin, -std::min(kPi - start, start - m_int.width));
      continue;
    }
    margin = std::min(margin, std::min(start, m_int.width - (start + img.width)));
  }
  return margin;
}

double sampled_invariance_margin(std::span<const Mat2> system, const Cone& cone, std::size_t samples) {
  const ProjInterval& m_int = cone.interval;
  samples = std::max<std::size_t>(samples, 2);
  double margin = std::numeric_limits<double>::infinity();
  for (const Mat2& a : system) {
    const Mat2 inv = a.inverse();
    for (std::size_t j = 0; j < samples; ++j) {
      const double theta = m_int.lo + m_int.width * static_cast<double>(j) / static_cast<double>(samples - 1);
      const double image = apply(inv, ProjPoint::from_angle(theta)).theta();
      margin = std::min(margin, signed_depth(m_int, image));
    }
  }
  return margin;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n == 0) {
    return {};
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

std::size_t default_domination_depth(std::size_t alphabet) {
  return std::max<std::size_t>(max_depth_within(alphabet, 12, std::size_t{1} << 16), 1);
}

DominationEstimate estimate_domination(std::span<const Mat2> system, std::size_t n_max, std::size_t budget) {
  if (n_max == 0) {
    throw std::invalid_argument("estimate_domination: n_max must be at least 1");
  }
  word_count_checked(system.size(), n_max, budget);
  DominationEstimate est;
  est.min_log_ratio.assign(n_max, std::numeric_limits<double>::infinity());
  visit_word_tree(system, n_max, ProductOrder::forward, [&](std::size_t level, std::size_t, const Mat2& product, double det) {
    const SingularValues sv = singular_values(product, det);
    const double r = std::log(sv.largest) - std::log(sv.smallest);
    est.min_log_ratio[level - 1] = std::min(est.min_log_ratio[level - 1], r);
  });
  for (std::size_t n = 1; n < n_max; ++n) {
    if (est.min_log_ratio[n] < est.min_log_ratio[n - 1] - 1e-12) {
      std::ostringstream msg;
      msg << "m_n decreases from depth " << n << " to " << n + 1;
      est.warnings.push_back(msg.str());
    }
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t n = (n_max + 1) / 2; n <= n_max; ++n) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(est.min_log_ratio[n - 1]);
  }
  if (xs.size() == 1) {
    xs.insert(xs.begin(), 0.0);
    ys.insert(ys.begin(), 0.0);
  }
  const LinearFit fit = least_squares(xs, ys);
  est.beta = fit.slope;
  est.constant = std::exp(fit.intercept);
  if (est.beta < 1e-8) {
    est.no_domination = true;
    est.warnings.push_back("no domination: singular value ratio does not grow");
  }
  return est;
}

double SplittingCertificate::error_bound(std::size_t depth) const {
  return gap_constant * std::exp(-beta * static_cast<double>(depth));
}

SplittingSearch find_backward_invariant_multicone(std::span<const Mat2> system, const SplittingOptions& opts) {
  SplittingSearch search;
  if (system.empty()) {
    search.diagnostics = "empty system";
    return search;
  }
  for (std::size_t i = 0; i < system.size(); ++i) {
    if (system[i].det() == 0.0) {
      throw std::domain_error("singular matrix");
    }
  }
  auto cone_margin = [&](const Cone& c) {
    return std::min(backward_invariance_margin(system, c),
                    sampled_invariance_margin(system, c, opts.boundary_samples));
  };

  std::optional<Cone> chosen;
  double chosen_margin = 0.0;
  std::string method;
  std::ostringstream diag;

  const bool sign_definite =
      std::all_of(system.begin(), system.end(), [](const Mat2& m) { return m.sign_definite(); });
  if (sign_definite) {
    // {xy ≤ 0}: the lines of the second and fourth quadrants.
    const Cone quadrant{{kPi / 2.0, kPi / 2.0}};
    const double m = cone_margin(quadrant);
    if (m > 0.0) {
      chosen = quadrant;
      chosen_margin = m;
      method = "sign-definite quadrant";
    } else {
      diag << "quadrant cone {xy<=0} not backward invariant (margin " << m << "); ";
    }
  }

  if (!chosen) {
    constexpr double kAxisClearance = 0.01;
    const double axis = top_left_singular_angle(system.front());
    ProjInterval k{axis + kAxisClearance, kPi - 2.0 * kAxisClearance};
    bool covered = false;
    std::vector<ProjInterval> images(system.size());
    for (std::size_t round = 0; round < opts.refinement_rounds; ++round) {
      for (std::size_t i = 0; i < system.size(); ++i) {
        images[i] = image_interval(system[i].inverse(), k);
      }
      const auto hull = projective_hull(images);
      if (!hull || hull->width >= kPi - 1e-9) {
        diag << "hull of inverse images covers the projective line at round " << round + 1 << "; ";
        covered = true;
        break;
      }
      k = *hull;
    }
    if (!covered) {
      const double room = 0.5 * (kPi - k.width);
      for (int j = 1; j <= 40; ++j) {
        const double eps = room * std::ldexp(1.0, -j);
        const Cone candidate{{wrap_projective(k.lo - eps), k.width + 2.0 * eps}};
        const double m = cone_margin(candidate);
        if (m > 0.0 && m > chosen_margin) {
          chosen = candidate;
          chosen_margin = m;
        }
      }
      if (!chosen) {
        diag << "no fattening of the limiting hull is backward invariant after " << opts.refinement_rounds
             << " rounds; ";
      }
      method = "hull iteration";
    }
  }

  if (!chosen) {
    diag << "undetermined (single-cone search only; failure does not disprove domination)";
    search.diagnostics = diag.str();
    return search;
  }

  const std::size_t dom_depth =
      opts.domination_depth == 0 ? default_domination_depth(system.size()) : opts.domination_depth;
  SplittingCertificate cert;
  cert.cone = *chosen;
  cert.margin = chosen_margin;
  cert.method = method;
  cert.domination = estimate_domination(system, dom_depth, opts.budget);
  cert.beta = cert.domination.beta;
  if (cert.domination.no_domination || !(cert.beta > 0.0)) {
    diag << "invariant cone found but measured domination exponent is not positive";
    search.diagnostics = diag.str();
    return search;
  }
  const std::size_t gap_depth = max_depth_within(system.size(), opts.gap_depth, std::size_t{1} << 14);
  cert.gap_constant = gap_constant(system, cert.cone, cert.beta, gap_depth);
  search.certificate = cert;
  search.diagnostics = "certified by " + method;
  return search;
}

DirectionEstimate strong_stable_direction(std::span<const Mat2> system, std::span<const Symbol> word,
                                          std::size_t depth, const SplittingCertificate& cert, Seed seed) {
  require_valid(cert);
  if (depth > word.size()) {
    throw std::invalid_argument("strong_stable_direction: depth exceeds word length");
  }
  Vec2 v = seed_line(cert.cone.interval, seed).unit();
  for (std::size_t j = depth; j-- > 0;) {
    if (word[j] >= system.size()) {
      throw std::out_of_range("symbol out of range");
    }
    v = system[word[j]].inverse() * v;
    v = v * (1.0 / v.norm());
  }
  return {ProjPoint(v), cert.error_bound(depth)};
}

DirectionEstimate stable_direction(std::span<const Mat2> system, std::span<const Symbol> word, std::size_t depth,
                                   const SplittingCertificate& cert, Seed seed) {
  require_valid(cert);
  if (depth > word.size()) {
    throw std::invalid_argument("stable_direction: depth exceeds word length");
  }
  Vec2 v = seed_line(cert.cone.interval.complement(), seed).unit();
  for (std::size_t j = word.size() - depth; j < word.size(); ++j) {
    if (word[j] >= system.size()) {
      throw std::out_of_range("symbol out of range");
    }
    v = system[word[j]] * v;
    v = v * (1.0 / v.norm());
  }
  return {ProjPoint(v), cert.error_bound(depth)};
}

HolderReport holder_direction_check(std::span<const Mat2> system, const SplittingCertificate& cert,
                                    std::size_t depth, std::size_t samples, std::mt19937_64& rng) {
  require_valid(cert);
  const std::size_t n_symbols = system.size();
  if (n_symbols < 2) {
    throw std::invalid_argument("holder_direction_check: needs at least two symbols");
  }
  std::uniform_int_distribution<Symbol> any(0, static_cast<Symbol>(n_symbols - 1));
  std::uniform_int_distribution<Symbol> other(1, static_cast<Symbol>(n_symbols - 1));
  HolderReport report;
  const std::size_t k_max = depth / 2;
  for (std::size_t k = 0; k <= k_max; ++k) {
    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      Word i(depth);
      Word j(depth);
      for (auto& sym : i) {
        sym = any(rng);
      }
      for (std::size_t p = 0; p < depth; ++p) {
        if (p < k) {
          j[p] = i[p];
        } else if (p == k) {
          j[p] = static_cast<Symbol>((i[p] + other(rng)) % n_symbols);
        } else {
          j[p] = any(rng);
        }
      }
      const auto ei = strong_stable_direction(system, i, depth, cert);
      const auto ej = strong_stable_direction(system, j, depth, cert);
      worst = std::max(worst, angle(ei.direction, ej.direction));
    }
    report.max_angle_by_agreement.push_back(worst);
    report.fitted_constant =
        std::max(report.fitted_constant, worst * std::exp(cert.beta * static_cast<double>(k)));
  }
  std::vector<double> ks;
  std::vector<double> logs;
  for (std::size_t k = 1; k < report.max_angle_by_agreement.size(); ++k) {
    if (report.max_angle_by_agreement[k] > 1e-14) {
      ks.push_back(static_cast<double>(k));
      logs.push_back(std::log(report.max_angle_by_agreement[k]));
    }
  }
  if (ks.size() < 2) {
    // Angles at rounding level: the line field is locally constant.
    report.slope = -std::numeric_limits<double>::infinity();
    report.passed = true;
    return report;
  }
  report.slope = least_squares(ks, logs).slope;
  report.passed = report.slope <= -cert.beta / 2.0;
  return report;
}

}  // namespace affdim
