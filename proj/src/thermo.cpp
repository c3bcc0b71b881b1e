#include "affdim/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace affdim {

namespace {

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    out *= base;
  }
  return out;
}

double normalize_sum(std::vector<double>& v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) {
    x /= total;
  }
  return total;
}

// Principal eigenvector of a positive-ish operator by power iteration.
template <class Step>
std::vector<double> principal_vector(std::size_t states, Step step, const PowerIterationOptions& opts,
                                     double& eigenvalue, std::size_t& iterations) {
  std::vector<double> v(states, 1.0 / static_cast<double>(states));
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    std::vector<double> next = step(v);
    eigenvalue = normalize_sum(next);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < states; ++i) {
      diff = std::max(diff, std::abs(next[i] - v[i]));
      scale = std::max(scale, next[i]);
    }
    v = std::move(next);
    if (diff <= opts.tol * scale) {
      iterations = std::max(iterations, it);
      return v;
    }
  }
  std::ostringstream msg;
  msg << "power iteration did not converge in " << opts.max_iterations << " iterations";
  throw std::runtime_error(msg.str());
}

}  // namespace

StableLineField::StableLineField(std::span<const Mat2> system, const SplittingCertificate& cert,
                                 std::size_t tail_depth)
    : system_(system.begin(), system.end()) {
  const Word tail(tail_depth, 0);
  tail_ = stable_direction(system, tail, tail_depth, cert).direction.unit();
}

ProjPoint StableLineField::operator()(std::span<const Symbol> prefix) const {
  Vec2 v = tail_;
  for (Symbol s : prefix) {
    v = system_.at(s) * v;
    v = v * (1.0 / v.norm());
  }
  return ProjPoint(v);
}

Potential Potential::kaenmaki(std::span<const Mat2> system, const SplittingCertificate& cert, double s,
                              std::size_t tail_depth) {
  if (!(s >= 0.0)) {
    throw std::invalid_argument("kaenmaki potential: s must be non-negative");
  }
  Potential p;
  p.kind_ = Kind::kaenmaki;
  p.alphabet_ = system.size();
  p.s_ = s;
  auto field = std::make_shared<StableLineField>(system, cert, tail_depth);
  std::vector<Mat2> mats(system.begin(), system.end());
  p.eval_ = [field, mats, s](std::span<const Symbol> past) {
    const Mat2& a = mats.at(past.back());
    const double log_det = std::log(std::abs(a.det()));
    if (s >= 2.0) {
      return 0.5 * s * log_det;
    }
    const double log_norm = std::log(restricted_norm(a, (*field)(past.first(past.size() - 1))));
    if (s <= 1.0) {
      return s * log_norm;
    }
    return (s - 1.0) * log_det + (2.0 - s) * log_norm;
  };
  return p;
}

Potential Potential::bernoulli(std::vector<double> weights) {
  if (weights.empty()) {
    throw std::invalid_argument("bernoulli potential: no weights");
  }
  for (double w : weights) {
    if (!(w > 0.0)) {
      throw std::invalid_argument("bernoulli potential: weights must be strictly positive");
    }
  }
  Potential p;
  p.kind_ = Kind::bernoulli;
  p.alphabet_ = weights.size();
  p.weights_ = std::move(weights);
  std::vector<double> logs;
  for (double w : p.weights_) {
    logs.push_back(std::log(w));
  }
  p.eval_ = [logs](std::span<const Symbol> past) { return logs.at(past.back()); };
  return p;
}

Potential Potential::constant(std::size_t alphabet, double value) {
  Potential p;
  p.kind_ = Kind::constant;
  p.alphabet_ = alphabet;
  p.s_ = value;
  p.eval_ = [value](std::span<const Symbol>) { return value; };
  return p;
}

Potential Potential::custom(std::size_t alphabet, Evaluator fn) {
  Potential p;
  p.kind_ = Kind::custom;
  p.alphabet_ = alphabet;
  p.eval_ = std::move(fn);
  return p;
}

double Potential::operator()(std::span<const Symbol> past) const {
  if (past.empty()) {
    throw std::invalid_argument("potential evaluated on an empty word");
  }
  return eval_(past);
}

TransferOperator::TransferOperator(const Potential& potential, std::size_t depth, std::size_t budget)
    : alphabet_(potential.alphabet()), depth_(depth) {
  if (depth == 0) {
    throw std::invalid_argument("transfer operator: depth must be at least 1");
  }
  const std::size_t states = word_count_checked(alphabet_, depth, budget);
  high_ = states / alphabet_;
  weights_.resize(states);
  for (std::size_t idx = 0; idx < states; ++idx) {
    const Word w = decode_word(idx, alphabet_, depth);
    weights_[idx] = std::exp(potential(w));
  }
}

std::size_t TransferOperator::successor(std::size_t state, Symbol next) const {
  return (state % high_) * alphabet_ + next;
}

std::size_t TransferOperator::predecessor(std::size_t state, Symbol oldest) const {
  return oldest * high_ + state / alphabet_;
}

double TransferOperator::entry(std::size_t from, std::size_t to) const {
  return successor(from, static_cast<Symbol>(to % alphabet_)) == to ? weights_[to] : 0.0;
}

std::vector<std::vector<double>> TransferOperator::to_dense() const {
  std::vector<std::vector<double>> m(states(), std::vector<double>(states(), 0.0));
  for (std::size_t w = 0; w < states(); ++w) {
    for (Symbol j = 0; j < alphabet_; ++j) {
      const std::size_t to = successor(w, j);
      m[w][to] = weights_[to];
    }
  }
  return m;
}

std::vector<double> TransferOperator::apply(const std::vector<double>& r) const {
  std::vector<double> out(states(), 0.0);
  for (std::size_t w = 0; w < states(); ++w) {
    double acc = 0.0;
    for (Symbol j = 0; j < alphabet_; ++j) {
      const std::size_t to = successor(w, j);
      acc += weights_[to] * r[to];
    }
    out[w] = acc;
  }
  return out;
}

std::vector<double> TransferOperator::apply_transpose(const std::vector<double>& l) const {
  std::vector<double> out(states(), 0.0);
  for (std::size_t to = 0; to < states(); ++to) {
    double acc = 0.0;
    for (Symbol a = 0; a < alphabet_; ++a) {
      acc += l[predecessor(to, a)];
    }
    out[to] = weights_[to] * acc;
  }
  return out;
}

CylinderMeasure CylinderMeasure::marginal(bool drop_newest) const {
  if (depth == 0) {
    throw std::invalid_argument("marginal of a depth-0 measure");
  }
  CylinderMeasure out = *this;
  out.depth = depth - 1;
  const std::size_t size = masses.size() / alphabet;
  out.masses.assign(size, 0.0);
  for (std::size_t idx = 0; idx < masses.size(); ++idx) {
    out.masses[drop_newest ? idx / alphabet : idx % size] += masses[idx];
  }
  return out;
}

GibbsMeasure::GibbsMeasure(const TransferOperator& op, const PowerIterationOptions& opts) : op_(op) {
  const std::size_t states = op_.states();
  double lambda_left = 0.0;
  right_ = principal_vector(
      states, [&](const std::vector<double>& v) { return op_.apply(v); }, opts, lambda_, iterations_);
  left_ = principal_vector(
      states, [&](const std::vector<double>& v) { return op_.apply_transpose(v); }, opts, lambda_left,
      iterations_);
  cylinders_.depth = op_.depth();
  cylinders_.alphabet = op_.alphabet();
  cylinders_.masses.resize(states);
  for (std::size_t i = 0; i < states; ++i) {
    cylinders_.masses[i] = left_[i] * right_[i];
  }
  normalize_sum(cylinders_.masses);
  cylinders_.pressure = std::log(lambda_);
  marginals_.resize(op_.depth());
  marginals_.back() = cylinders_;
  for (std::size_t d = op_.depth() - 1; d-- > 0;) {
    marginals_[d] = marginals_[d + 1].marginal();
  }
}

double GibbsMeasure::mass(std::span<const Symbol> word) const {
  if (word.empty()) {
    throw std::invalid_argument("mass of an empty word");
  }
  const std::size_t k = op_.depth();
  const std::size_t n = op_.alphabet();
  for (Symbol s : word) {
    if (s >= n) {
      throw std::out_of_range("symbol out of range");
    }
  }
  if (word.size() <= k) {
    return marginals_[word.size() - 1].masses[encode_word(word, n)];
  }
  std::size_t state = encode_word(word.first(k), n);
  double m = cylinders_.masses[state];
  for (std::size_t j = k; j < word.size(); ++j) {
    const std::size_t next = op_.successor(state, word[j]);
    m *= op_.weights()[next] * right_[next] / (lambda_ * right_[state]);
    state = next;
  }
  return m;
}

std::vector<std::vector<double>> GibbsMeasure::masses_up_to(std::size_t max_len, std::size_t budget) const {
  const std::size_t k = op_.depth();
  const std::size_t n = op_.alphabet();
  word_count_checked(n, max_len, budget);
  std::vector<std::vector<double>> out;
  for (std::size_t len = 1; len <= max_len; ++len) {
    if (len <= k) {
      out.push_back(marginals_[len - 1].masses);
      continue;
    }
    const std::vector<double>& prev = out.back();
    const std::size_t states = op_.states();
    std::vector<double> cur(prev.size() * n);
    for (std::size_t idx = 0; idx < prev.size(); ++idx) {
      const std::size_t state = idx % states;
      for (Symbol j = 0; j < n; ++j) {
        const std::size_t next = op_.successor(state, j);
        cur[idx * n + j] = prev[idx] * op_.weights()[next] * right_[next] / (lambda_ * right_[state]);
      }
    }
    out.push_back(std::move(cur));
  }
  return out;
}

GibbsCheck gibbs_constant_check(const GibbsMeasure& measure, const Potential& potential, std::size_t n_test,
                                std::size_t samples, std::mt19937_64& rng) {
  if (n_test < measure.depth()) {
    throw std::invalid_argument("gibbs_constant_check: n_test must be at least the cylinder depth");
  }
  const std::size_t n = measure.alphabet();
  const double pressure = measure.pressure();
  GibbsCheck check;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  auto visit = [&](const Word& w) {
    double birkhoff = 0.0;
    for (std::size_t j = 1; j <= w.size(); ++j) {
      birkhoff += potential(std::span<const Symbol>(w).first(j));
    }
    const double log_ratio =
        std::log(measure.mass(w)) + static_cast<double>(w.size()) * pressure - birkhoff;
    lo = std::min(lo, log_ratio);
    hi = std::max(hi, log_ratio);
    ++check.words;
  };
  const double total = std::pow(static_cast<double>(n), static_cast<double>(n_test));
  if (total <= static_cast<double>(samples)) {
    const std::size_t count = ipow(n, n_test);
    for (std::size_t idx = 0; idx < count; ++idx) {
      visit(decode_word(idx, n, n_test));
    }
  } else {
    std::uniform_int_distribution<Symbol> pick(0, static_cast<Symbol>(n - 1));
    Word w(n_test);
    for (std::size_t s = 0; s < samples; ++s) {
      for (auto& sym : w) {
        sym = pick(rng);
      }
      visit(w);
    }
  }
  check.min_ratio = std::exp(lo);
  check.max_ratio = std::exp(hi);
  check.constant = std::exp(std::max(hi, -lo));
  return check;
}

CylinderMeasure plus_side_measure(const CylinderMeasure& minus) {
  if (minus.side != MeasureSide::minus) {
    throw std::invalid_argument("plus_side_measure: expected a measure on pasts");
  }
  CylinderMeasure plus = minus;
  plus.side = MeasureSide::plus;
  return plus;
}

QuasiBernoulliCheck quasi_bernoulli_check(const GibbsMeasure& measure, std::size_t depth, std::size_t budget) {
  if (depth < 2) {
    throw std::invalid_argument("quasi_bernoulli_check: depth must be at least 2");
  }
  const std::size_t n = measure.alphabet();
  const auto masses = measure.masses_up_to(depth, budget);
  QuasiBernoulliCheck check;
  check.depth = depth;
  double worst = 0.0;
  for (std::size_t len = 2; len <= depth; ++len) {
    const auto& whole = masses[len - 1];
    for (std::size_t idx = 0; idx < whole.size(); ++idx) {
      std::size_t tail_size = 1;
      for (std::size_t v_len = 1; v_len < len; ++v_len) {
        tail_size *= n;
        const std::size_t u = idx / tail_size;
        const std::size_t v = idx % tail_size;
        const double ratio = whole[idx] / (masses[len - v_len - 1][u] * masses[v_len - 1][v]);
        worst = std::max(worst, std::abs(std::log(ratio)));
        ++check.pairs;
      }
    }
  }
  check.constant = std::exp(worst);
  return check;
}

LyapunovExponents lyapunov_exponents(std::span<const Mat2> system, const GibbsMeasure& measure,
                                     const SplittingCertificate& cert, std::size_t tail_depth) {
  if (!cert.valid()) {
    throw std::invalid_argument("invalid splitting certificate");
  }
  if (measure.alphabet() != system.size()) {
    throw std::invalid_argument("lyapunov_exponents: alphabet mismatch");
  }
  const StableLineField field(system, cert, tail_depth);
  const std::size_t k = measure.depth();
  const auto& masses = measure.cylinders().masses;
  double log_norm = 0.0;
  double log_det = 0.0;
  double log_alpha = 0.0;
  double log_det_word = 0.0;
  for (std::size_t idx = 0; idx < masses.size(); ++idx) {
    const Word w = decode_word(idx, system.size(), k);
    const Mat2& a = system[w.back()];
    const double mu = masses[idx];
    log_norm += mu * std::log(restricted_norm(a, field(std::span<const Symbol>(w).first(k - 1))));
    log_det += mu * std::log(std::abs(a.det()));
    const Mat2 product = word_product(w, system, ProductOrder::reversed);
    log_alpha += mu * std::log(largest_singular_value(product));
    for (Symbol sym : w) {
      log_det_word += mu * std::log(std::abs(system[sym].det()));
    }
  }
  LyapunovExponents out;
  out.chi_s = -log_norm;
  out.chi_ss = -log_det - out.chi_s;
  out.chi_s_words = -log_alpha / static_cast<double>(k);
  out.chi_sum_words = -log_det_word / static_cast<double>(k);
  return out;
}

EntropyEstimate entropy(const GibbsMeasure& measure, const Potential& potential) {
  const std::size_t k = measure.depth();
  const auto& masses = measure.cylinders().masses;
  double integral = 0.0;
  double block = 0.0;
  for (std::size_t idx = 0; idx < masses.size(); ++idx) {
    const double mu = masses[idx];
    if (mu <= 0.0) {
      continue;
    }
    integral += mu * potential(decode_word(idx, measure.alphabet(), k));
    block -= mu * std::log(mu);
  }
  EntropyEstimate out;
  out.h = measure.pressure() - integral;
  out.block_entropy = block / static_cast<double>(k);
  out.gap = out.block_entropy - out.h;
  return out;
}

std::size_t default_cylinder_depth(std::size_t alphabet) {
  std::size_t k = 6;
  while (k > 1 && std::pow(static_cast<double>(alphabet), static_cast<double>(k)) > 4096.0) {
    --k;
  }
  return k;
}

ThermoReport thermo_report(std::span<const Mat2> system, const SplittingCertificate& cert, const Potential& potential,
                           const ThermoOptions& opts, std::mt19937_64& rng) {
  if (potential.alphabet() != system.size()) {
    throw std::invalid_argument("thermo_report: potential and system have different alphabets");
  }
  ThermoReport report;
  const std::size_t k = opts.depth == 0 ? default_cylinder_depth(system.size()) : opts.depth;
  report.depth = k;
  const GibbsMeasure measure(TransferOperator(potential, k), opts.power);
  report.pressure = measure.pressure();
  const EntropyEstimate ent = entropy(measure, potential);
  report.h = ent.h;
  report.block_entropy_gap = ent.gap;
  const LyapunovExponents chi = lyapunov_exponents(system, measure, cert, opts.tail_depth);
  report.chi_s = chi.chi_s;
  report.chi_ss = chi.chi_ss;
  report.chi_s_word_gap = chi.chi_s_words - chi.chi_s;
  report.gibbs_constant = gibbs_constant_check(measure, potential, 2 * k, opts.gibbs_samples, rng).constant;
  report.gibbs_constant_long = gibbs_constant_check(measure, potential, 4 * k, opts.gibbs_samples, rng).constant;
  std::size_t qb_depth = 2 * k;
  while (qb_depth > 2 && std::pow(static_cast<double>(system.size()), static_cast<double>(qb_depth)) >
                             static_cast<double>(std::size_t{1} << 20)) {
    --qb_depth;
  }
  if (system.size() >= 2) {
    report.qb_constant = quasi_bernoulli_check(measure, qb_depth).constant;
  }
  if (!(report.chi_s > 0.0) || report.chi_s > report.chi_ss) {
    report.warnings.push_back("Lyapunov exponents violate 0 < chi_s <= chi_ss");
  }
  if (report.qb_constant > std::pow(report.gibbs_constant, 3.0) * (1.0 + 1e-9)) {
    report.warnings.push_back("quasi-Bernoulli constant exceeds the cube of the Gibbs constant");
  }
  return report;
}

ThermoReport kaenmaki_report(std::span<const Mat2> system, const SplittingCertificate& cert, double s,
                             const ThermoOptions& opts, std::mt19937_64& rng) {
  return thermo_report(system, cert, Potential::kaenmaki(system, cert, s, opts.tail_depth), opts, rng);
}

}  // namespace affdim
