#include "affdim/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "affdim/dimension.hpp"
#include "affdim/geometry.hpp"
#include "affdim/pressure.hpp"
#include "affdim/splitting.hpp"
#include "affdim/thermo.hpp"
#include "affdim/transversality.hpp"

namespace affdim::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Json num(double value, double error) { return Json{{"value", value}, {"error", error}}; }

Json exact(double value) { return num(value, 0.0); }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

AffinityDimension run_affinity(const SystemSpec& spec, const CommandOptions& opts) {
  AffinityDimensionOptions ad;
  ad.max_depth = opts.depth.value_or(spec.budgets.pressure_depth);
  ad.tol = opts.tol.value_or(spec.tolerances.pressure);
  return affinity_dimension(spec.matrices, ad);
}

Json splitting_json(const SplittingSearch& search) {
  Json j;
  j["certified"] = search.certificate && search.certificate->valid();
  if (search.certificate) {
    const SplittingCertificate& c = *search.certificate;
    j["method"] = c.method;
    j["cone"] = {{"lo", exact(c.cone.interval.lo)}, {"width", exact(c.cone.interval.width)}};
    j["margin"] = exact(c.margin);
    // β̂ is a fitted slope; its error is the spread of the per-depth increments.
    double spread = 0.0;
    const auto& m = c.domination.min_log_ratio;
    for (std::size_t i = m.size() / 2; i + 1 < m.size(); ++i) {
      spread = std::max(spread, std::abs((m[i + 1] - m[i]) - c.beta));
    }
    j["beta"] = num(c.beta, spread);
    j["gap_constant"] = num(c.gap_constant, 0.0);
    j["warnings"] = c.domination.warnings;
  }
  j["diagnostics"] = search.diagnostics;
  return j;
}

Potential make_potential(const SystemSpec& spec, const SplittingCertificate& cert, double s0,
                         std::size_t tail_depth) {
  const PotentialSpec& p = spec.potential;
  if (p.kind == "bernoulli") {
    return Potential::bernoulli(p.weights);
  }
  if (p.kind == "constant") {
    return Potential::constant(spec.matrices.size(), p.value);
  }
  return Potential::kaenmaki(spec.matrices, cert, p.s.value_or(s0), tail_depth);
}

// Error of f at x by one-sided perturbation of each argument by its error.
template <class F>
double propagate(F f, const std::vector<double>& x, const std::vector<double>& err) {
  const double base = f(x);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> y = x;
    y[i] += err[i];
    const double up = f(y);
    y[i] = x[i] - err[i];
    const double down = f(y);
    double d = 0.0;
    if (std::isfinite(up)) {
      d = std::max(d, std::abs(up - base));
    }
    if (std::isfinite(down)) {
      d = std::max(d, std::abs(down - base));
    }
    total += d;
  }
  return total;
}

std::size_t default_cloud_depth(std::size_t alphabet) {
  std::size_t d = 1;
  while (std::pow(static_cast<double>(alphabet), static_cast<double>(d + 1)) <= 65536.0 && d < 40) {
    ++d;
  }
  return d;
}

AffineIFS make_ifs(const SystemSpec& spec) {
  if (!spec.translations) {
    throw std::invalid_argument("this command needs \"translations\" in the system file");
  }
  AffineIFS ifs{spec.matrices, *spec.translations};
  ifs.validate();
  return ifs;
}

Json box_json(const BoxCount& box) {
  const std::size_t m = box.scales.size();
  double se = std::abs(box.slope);
  if (m > 2) {
    double sxx = 0.0;
    double mean = 0.0;
    for (double s : box.scales) {
      mean += -std::log(s) / static_cast<double>(m);
    }
    for (double s : box.scales) {
      sxx += (-std::log(s) - mean) * (-std::log(s) - mean);
    }
    double rss = 0.0;
    for (double r : box.residuals) {
      rss += r * r;
    }
    se = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
  }
  Json scales = Json::array();
  for (std::size_t i = 0; i < m; ++i) {
    scales.push_back({{"scale", exact(box.scales[i])}, {"count", box.counts[i]}, {"residual", exact(box.residuals[i])}});
  }
  return {{"slope", num(box.slope, se)}, {"scales", scales}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot write " + path.string());
  }
  f << text;
}

}  // namespace

std::vector<double> parse_s_grid(const std::string& text) {
  std::vector<double> out;
  auto to_double = [&](const std::string& t) {
    std::size_t used = 0;
    const double x = std::stod(t, &used);
    if (used != t.size()) {
      throw std::invalid_argument("bad number in s-grid: " + t);
    }
    return x;
  };
  const auto c1 = text.find(':');
  if (c1 != std::string::npos) {
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) {
      throw std::invalid_argument("s-grid range must be lo:hi:step");
    }
    const double lo = to_double(text.substr(0, c1));
    const double hi = to_double(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = to_double(text.substr(c2 + 1));
    if (!(step > 0.0) || hi < lo) {
      throw std::invalid_argument("s-grid range needs lo <= hi and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) {
      out.push_back(lo + static_cast<double>(i) * step);
    }
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(to_double(item));
  }
  if (out.empty()) {
    throw std::invalid_argument("empty s-grid");
  }
  return out;
}

Json cmd_dimension(const SystemSpec& spec, const CommandOptions& opts) {
  check_preconditions(spec);
  std::mt19937_64 rng(opts.seed);
  const std::span<const Mat2> system(spec.matrices);
  Json report;
  report["command"] = "dimension";
  report["seed"] = opts.seed;
  report["maps"] = system.size();
  Json warnings = Json::array();

  const AffinityDimension ad = run_affinity(spec, opts);
  report["affinity_dimension"] = {{"s0", num(ad.s0, ad.error_bound)},
                                  {"depth", ad.depth},
                                  {"clamped", ad.clamped},
                                  {"roots_by_depth", ad.roots_by_depth}};
  for (const auto& w : ad.warnings) {
    warnings.push_back(w);
  }

  const SplittingSearch search = find_backward_invariant_multicone(system);
  report["splitting"] = splitting_json(search);
  const bool certified = search.certificate && search.certificate->valid();

  TransversalityCertificate trans;
  {
    std::mt19937_64 trng(opts.seed);
    trans = certify_translation_transversality(system, trng);
  }

  std::optional<ThermoReport> thermo;
  if (certified) {
    ThermoOptions to;
    to.depth = spec.budgets.cylinder_depth;
    to.power.tol = spec.tolerances.power_iteration;
    const Potential potential = make_potential(spec, *search.certificate, ad.s0, to.tail_depth);
    thermo = thermo_report(system, *search.certificate, potential, to, rng);
    const ThermoReport& t = *thermo;
    const double chi_err = std::abs(t.chi_s_word_gap);
    report["thermo"] = {
        {"potential", spec.potential.kind},
        {"potential_parameter",
         spec.potential.kind == "kaenmaki" ? num(spec.potential.s.value_or(ad.s0), spec.potential.s ? 0.0 : ad.error_bound)
                                           : Json(nullptr)},
        {"cylinder_depth", t.depth},
        {"pressure", num(t.pressure, spec.tolerances.power_iteration)},
        {"h", num(t.h, std::abs(t.block_entropy_gap))},
        {"chi_s", num(t.chi_s, chi_err)},
        {"chi_ss", num(t.chi_ss, chi_err)},
        {"gibbs_C", num(t.gibbs_constant, std::abs(t.gibbs_constant_long - t.gibbs_constant))},
        {"qb_C", num(t.qb_constant, spec.tolerances.power_iteration)},
        {"warnings", t.warnings}};

    const std::vector<double> x{t.h, t.chi_s, t.chi_ss};
    const std::vector<double> e{std::abs(t.block_entropy_gap), chi_err, chi_err};
    auto guarded = [](auto f) {
      return [f](const std::vector<double>& v) {
        try {
          return f(v);
        } catch (const std::exception&) {
          return std::numeric_limits<double>::quiet_NaN();
        }
      };
    };
    Json dim;
    if (t.chi_s > 0.0 && t.chi_s <= t.chi_ss && t.h >= 0.0) {
      auto ldim = guarded([](const std::vector<double>& v) { return lyapunov_dimension(v[0], v[1], v[2]); });
      dim["lyapunov_dim"] = num(ldim(x), propagate(ldim, x, e));
    } else {
      dim["lyapunov_dim"] = nullptr;
      warnings.push_back("Lyapunov dimension undefined: exponents or entropy out of range");
    }
    if (t.chi_ss > t.chi_s && t.chi_s > 0.0 && t.h >= 0.0) {
      const EssDimension ess = ess_dimension(t.h, t.chi_s, t.chi_ss, trans.certified);
      auto essf = guarded([](const std::vector<double>& v) { return ess_dimension(v[0], v[1], v[2]).value; });
      dim["ess_pushforward_dim"] = num(ess.value, propagate(essf, x, e));
      dim["ess_upper_bound_only"] = ess.upper_bound_only;
      auto ly = guarded([](const std::vector<double>& v) {
        return ledrappier_young(v[0], v[1], v[2], ess_dimension(v[0], v[1], v[2]).value);
      });
      dim["ly_dim"] = num(ly(x), propagate(ly, x, e));
      dim["ly_dim_transversal"] = "ess_pushforward_dim";
    } else {
      dim["ess_pushforward_dim"] = nullptr;
      dim["ly_dim"] = nullptr;
    }
    dim["s0"] = num(ad.s0, ad.error_bound);
    report["dimension"] = dim;
  } else {
    report["thermo"] = nullptr;
    report["dimension"] = {{"s0", num(ad.s0, ad.error_bound)}};
    warnings.push_back("no dominated splitting certificate; thermodynamic quantities skipped");
  }

  ConditionInputs ci;
  ci.s0 = ad.s0;
  ci.relaxed_bound = opts.relaxed_bound;
  if (thermo) {
    ci.h = thermo->h;
    ci.chi_s = thermo->chi_s;
    ci.chi_ss = thermo->chi_ss;
  }
  const ConditionFlags f = check_theorem_conditions(system, ci);
  Json mats = Json::array();
  for (const MatrixClass& m : f.matrices) {
    mats.push_back({{"sign_definite", m.sign_definite},
                    {"det_ratio", exact(m.det_ratio)},
                    {"norm", exact(m.norm)},
                    {"n_quantity", exact(m.n_quantity)},
                    {"in_M", m.in_m},
                    {"n_inequality", m.n_inequality},
                    {"in_N", m.in_n}});
  }
  Json cond = {{"matrices", mats},
               {"system_in_M", f.system_in_m},
               {"system_in_N", f.system_in_n},
               {"n_inequality_all", f.n_inequality_all},
               {"in_O", f.in_o},
               {"s0_above_five_thirds", f.s0_above_five_thirds},
               {"s0_above_three_halves", f.s0_above_three_halves}};
  if (f.in_o_relaxed) {
    cond["in_O_relaxed"] = *f.in_o_relaxed;
  }
  if (thermo) {
    cond["ess_ratio"] = exact(f.ess_ratio);
    cond["ess_condition"] = f.ess_condition;
    cond["ldim_condition"] = f.ldim_condition;
    cond["ldim_interpretation"] = f.ldim_interpretation;
    cond["chain"] = exact(f.chain);
    cond["chain_above_two"] = f.chain_above_two;
  }
  report["conditions"] = cond;

  report["transversality"] = {{"certified", trans.certified},
                              {"delta", exact(trans.delta)},
                              {"diagnostics", trans.diagnostics}};

  std::string ssc = "not evaluated";
  if (spec.translations) {
    const AffineIFS ifs = make_ifs(spec);
    const SscResult r = check_ssc(ifs, spec.budgets.ssc_depth);
    ssc = to_string(r.status);
    report["ssc_detail"] = {{"depth", r.depth}, {"message", r.message}};
    const std::size_t depth = spec.budgets.cloud_depth ? spec.budgets.cloud_depth : default_cloud_depth(ifs.size());
    try {
      const PointCloud cloud = generate_cloud(ifs, depth);
      report["box_count"] = box_json(box_dimension_estimate(cloud));
      report["box_count"]["cloud_depth"] = depth;
    } catch (const std::exception& e) {
      report["box_count"] = nullptr;
      warnings.push_back(std::string("box count skipped: ") + e.what());
    }
  }
  report["ssc"] = ssc;

  Json reasons = Json::array();
  if (ssc != "verified") {
    reasons.push_back("ssc: " + ssc);
  }
  const bool in_o = f.in_o || (f.in_o_relaxed && *f.in_o_relaxed);
  if (!f.system_in_n && !in_o) {
    reasons.push_back(opts.relaxed_bound ? "system is in neither N^N nor O_N (relaxed bound 3/2)"
                                         : "system is in neither N^N nor O_N");
  }
  if (!certified) {
    reasons.push_back("no dominated splitting certificate");
  }
  report["dimension_chain"] = {{"applicable", reasons.empty()},
                               {"claim", "dim_H nu^K = dim_H Lambda = dim_B Lambda = s0, for almost every system"},
                               {"reasons", reasons}};
  report["warnings"] = warnings;
  return report;
}

void cmd_pressure(const SystemSpec& spec, const CommandOptions& opts, std::ostream& csv) {
  check_preconditions(spec);
  const std::size_t n_max =
      opts.depth.value_or(spec.budgets.pressure_depth ? spec.budgets.pressure_depth
                                                      : default_pressure_depth(spec.matrices.size()));
  std::vector<double> grid = opts.s_grid;
  if (grid.empty()) {
    for (int i = 0; i <= 20; ++i) {
      grid.push_back(0.1 * i);
    }
  }
  for (double s : grid) {
    if (!(s >= 0.0)) {
      throw std::invalid_argument("s-grid values must be non-negative");
    }
  }
  csv << "n,s,pressure,movement\n";
  std::vector<double> prev(grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t n = 1; n <= n_max; ++n) {
    const PressureSpectrum spectrum(spec.matrices, n);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double p = spectrum.pressure(grid[i]);
      const double movement = n == 1 ? kInf : std::abs(p - prev[i]);
      csv << n << ',' << fmt(grid[i]) << ',' << fmt(p) << ',' << fmt(movement) << '\n';
      prev[i] = p;
    }
  }
}

void cmd_directions(const SystemSpec& spec, const CommandOptions& opts, std::ostream& csv) {
  check_preconditions(spec);
  const std::size_t n = spec.matrices.size();
  const SplittingSearch search = find_backward_invariant_multicone(spec.matrices);
  if (!search.certificate || !search.certificate->valid()) {
    throw std::invalid_argument("no dominated splitting certificate: " + search.diagnostics);
  }
  std::vector<Word> words;
  if (opts.words.empty()) {
    const std::size_t depth = opts.depth.value_or(4);
    const std::size_t count = word_count_checked(n, depth, 4096);
    for (std::size_t i = 0; i < count; ++i) {
      words.push_back(decode_word(i, n, depth));
    }
  } else {
    for (const auto& w : opts.words) {
      words.push_back(parse_word(w, n));
    }
  }
  csv << "word,es_angle,es_error,ess_angle,ess_error\n";
  for (const Word& w : words) {
    if (w.empty()) {
      throw std::invalid_argument("empty word");
    }
    const DirectionEstimate es = stable_direction(spec.matrices, w, w.size(), *search.certificate);
    const DirectionEstimate ess = strong_stable_direction(spec.matrices, w, w.size(), *search.certificate);
    csv << format_word(w, n) << ',' << fmt(es.direction.theta()) << ',' << fmt(es.error_bound) << ','
        << fmt(ess.direction.theta()) << ',' << fmt(ess.error_bound) << '\n';
  }
}

Json cmd_transversality(const SystemSpec& spec, const CommandOptions& opts) {
  check_preconditions(spec);
  const std::span<const Mat2> system(spec.matrices);
  Json report;
  report["command"] = "transversality";
  report["seed"] = opts.seed;
  Json mats = Json::array();
  bool in_m = true;
  bool in_n = true;
  bool sign_definite = true;
  for (const Mat2& a : system) {
    const MatrixClass m = classify_matrix(a);
    in_m = in_m && m.in_m;
    in_n = in_n && m.in_n;
    sign_definite = sign_definite && m.sign_definite;
    Json entry = {{"sign_definite", m.sign_definite},
                  {"det_ratio", exact(m.det_ratio)},
                  {"norm", exact(m.norm)},
                  {"n_quantity", exact(m.n_quantity)},
                  {"in_M", m.in_m},
                  {"n_inequality", m.n_inequality},
                  {"in_N", m.in_n}};
    if (m.sign_definite) {
      const DerivativeRange r = derivative_range(a);
      entry["derivative_inf"] = exact(r.inf);
      entry["derivative_sup"] = exact(r.sup);
    }
    mats.push_back(entry);
  }
  report["matrices"] = mats;
  report["system_in_M"] = in_m;
  report["system_in_N"] = in_n;

  std::mt19937_64 rng(opts.seed);
  const TransversalityCertificate c = certify_translation_transversality(system, rng);
  report["certificate"] = {{"certified", c.certified},
                           {"contraction", exact(c.contraction)},
                           {"derivative_lower_bound", exact(c.derivative_lower_bound)},
                           {"measured_min_derivative", num(c.measured_min_derivative, 1e-6)},
                           {"pairs_checked", c.pairs_checked},
                           {"delta", num(c.delta, c.delta * std::ldexp(1.0, -20))},
                           {"binding_constraint", c.binding_constraint},
                           {"diagnostics", c.diagnostics}};

  const SplittingSearch search = find_backward_invariant_multicone(system);
  if (sign_definite && search.certificate && search.certificate->valid() && system.size() >= 1) {
    const std::size_t depth = opts.depth.value_or(12);
    const CrossCheck x = ess_vs_pi_crosscheck(system, *search.certificate, depth, opts.samples, rng);
    report["ess_pi_crosscheck"] = {{"depth", x.depth},
                                   {"samples", opts.samples},
                                   {"max_angle", num(x.max_angle, x.bound)},
                                   {"within_bound", x.max_angle <= x.bound}};
  } else {
    report["ess_pi_crosscheck"] = nullptr;
  }
  return report;
}

Json cmd_render(const SystemSpec& spec, const CommandOptions& opts, std::ostream& csv, std::ostream& svg) {
  check_preconditions(spec);
  const AffineIFS ifs = make_ifs(spec);
  const std::size_t depth =
      opts.depth.value_or(spec.budgets.cloud_depth ? spec.budgets.cloud_depth : default_cloud_depth(ifs.size()));
  const PointCloud cloud = generate_cloud(ifs, depth);
  write_csv(csv, cloud);
  write_svg(svg, cloud);
  return {{"command", "render"},
          {"depth", depth},
          {"points", cloud.points.size()},
          {"error_radius", exact(cloud.max_error)},
          {"disk", {{"center", {exact(cloud.disk.center.x), exact(cloud.disk.center.y)}},
                    {"radius", exact(cloud.disk.radius)}}}};
}

int run_command(const std::string& command, const std::string& spec_path, const CommandOptions& opts,
                std::ostream& out, std::ostream& err) {
  SystemSpec spec;
  try {
    spec = load_system_spec(spec_path);
  } catch (const SpecError& e) {
    err << "spec error";
    if (e.line() > 0) {
      err << " at line " << e.line();
    }
    if (!e.field().empty()) {
      err << ", field " << e.field();
    }
    err << ": " << e.what() << '\n';
    return 1;
  }
  namespace fs = std::filesystem;
  try {
    auto emit = [&](const std::string& name, const std::string& text) {
      if (opts.out_dir) {
        fs::create_directories(*opts.out_dir);
        write_text(fs::path(*opts.out_dir) / name, text);
      } else {
        out << text;
      }
    };
    if (command == "dimension") {
      emit("dimension.json", cmd_dimension(spec, opts).dump(2) + "\n");
    } else if (command == "transversality") {
      emit("transversality.json", cmd_transversality(spec, opts).dump(2) + "\n");
    } else if (command == "pressure") {
      std::ostringstream csv;
      cmd_pressure(spec, opts, csv);
      emit("pressure.csv", csv.str());
    } else if (command == "directions") {
      std::ostringstream csv;
      cmd_directions(spec, opts, csv);
      emit("directions.csv", csv.str());
    } else if (command == "render") {
      std::ostringstream csv;
      std::ostringstream svg;
      Json summary = cmd_render(spec, opts, csv, svg);
      const fs::path dir = opts.out_dir.value_or(".");
      fs::create_directories(dir);
      write_text(dir / "cloud.csv", csv.str());
      write_text(dir / "cloud.svg", svg.str());
      summary["files"] = {(dir / "cloud.csv").string(), (dir / "cloud.svg").string()};
      out << summary.dump(2) << '\n';
    } else {
      err << "unknown command " << command << '\n';
      return 1;
    }
  } catch (const std::exception& e) {
    err << "precondition violated: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace affdim::cli
