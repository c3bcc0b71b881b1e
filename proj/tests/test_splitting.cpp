#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "affdim/splitting.hpp"

using namespace affdim;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

const std::vector<Mat2> kDiag{Mat2::diag(0.5, 0.25), Mat2::diag(0.5, 0.25)};
const std::vector<Mat2> kPositive{{0.5, 0.4, 0.1, 0.1}, {0.3, 0.2, 0.25, 0.4}};

SplittingCertificate certify(const std::vector<Mat2>& sys) {
  const auto search = find_backward_invariant_multicone(sys);
  REQUIRE(search.certificate.has_value());
  REQUIRE(search.certificate->valid());
  return *search.certificate;
}

Word random_word(std::mt19937_64& rng, std::size_t n, std::size_t alphabet) {
  std::uniform_int_distribution<Symbol> pick(0, static_cast<Symbol>(alphabet - 1));
  Word w(n);
  for (auto& s : w) {
    s = pick(rng);
  }
  return w;
}

}  // namespace

TEST_CASE("image intervals map endpoints to endpoints") {
  const ProjInterval i{0.2, 0.5};
  const Mat2 rot{std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3)};
  const ProjInterval r = image_interval(rot, i);
  CHECK(r.lo == Approx(0.5));
  CHECK(r.width == Approx(0.5));
  const ProjInterval f = image_interval(Mat2::diag(1.0, -1.0), i);  // reflection reverses orientation
  CHECK(f.lo == Approx(kPi - 0.7));
  CHECK(f.width == Approx(0.5));
  const ProjInterval a{1.0, 0.1};
  const ProjInterval b{1.05, 0.2};
  const std::vector<ProjInterval> arcs{a, b};
  const auto hull = projective_hull(arcs);
  REQUIRE(hull);
  CHECK(hull->lo == Approx(1.0));
  CHECK(hull->width == Approx(0.25));
}

TEST_CASE("positive systems certify with the quadrant cone") {
  const auto cert = certify(kPositive);
  CHECK(cert.method == "sign-definite quadrant");
  CHECK(cert.cone.interval.lo == Approx(kPi / 2));
  CHECK(cert.cone.interval.width == Approx(kPi / 2));
  CHECK(cert.margin > 0.0);
  CHECK(cert.beta > 0.0);
}

TEST_CASE("diagonal systems certify with a cone around e2") {
  for (std::size_t n : {1u, 2u, 5u}) {
    const std::vector<Mat2> sys(n, Mat2::diag(0.5, 0.25));
    const auto cert = certify(sys);
    CHECK(cert.cone.interval.contains(kPi / 2));
    CHECK_FALSE(cert.cone.interval.contains(0.0));
  }
}

TEST_CASE("a scaled rotation has no invariant cone") {
  const std::vector<Mat2> rot{{0.0, -0.5, 0.5, 0.0}};
  const auto search = find_backward_invariant_multicone(rot);
  CHECK_FALSE(search.certificate.has_value());
  CHECK(search.diagnostics.find("undetermined") != std::string::npos);
}

TEST_CASE("domination exponent") {
  const auto d = estimate_domination(kDiag, 10);
  CHECK(d.beta == Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(d.constant == Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(d.no_domination);
  const std::vector<Mat2> conformal{Mat2::diag(1.0 / 3, 1.0 / 3), Mat2::diag(1.0 / 3, 1.0 / 3)};
  const auto c = estimate_domination(conformal, 10);
  CHECK(c.no_domination);
  CHECK(std::abs(c.beta) < 1e-8);
  const auto p = estimate_domination(kPositive, 10);
  CHECK(p.beta > 0.0);
  for (std::size_t n = 1; n < p.min_log_ratio.size(); ++n) {
    CHECK(p.min_log_ratio[n] >= p.min_log_ratio[n - 1]);
  }
}

TEST_CASE("diagonal directions are the coordinate axes") {
  const auto cert = certify(kDiag);
  std::mt19937_64 rng(20);
  for (int i = 0; i < 20; ++i) {
    const Word w = random_word(rng, 12, 2);
    CHECK(strong_stable_direction(kDiag, w, 12, cert).direction.theta() == Approx(kPi / 2).epsilon(1e-15));
    CHECK(stable_direction(kDiag, w, 12, cert).direction.theta() == 0.0);
  }
}

TEST_CASE("directions of a positive system") {
  const auto cert = certify(kPositive);
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const Word w = random_word(rng, 16, 2);
    for (std::size_t n : {2u, 6u, 12u}) {
      const auto ess = strong_stable_direction(kPositive, w, n, cert);
      CHECK(ess.direction.theta() >= kPi / 2);  // closed second/fourth quadrant cone
      const auto low = strong_stable_direction(kPositive, w, n, cert, Seed::lower_boundary);
      const auto high = strong_stable_direction(kPositive, w, n, cert, Seed::upper_boundary);
      CHECK(angle(low.direction, high.direction) <= ess.error_bound * (1 + 1e-9));
      const auto es = stable_direction(kPositive, w, n, cert);
      const auto es_low = stable_direction(kPositive, w, n, cert, Seed::lower_boundary);
      const auto es_high = stable_direction(kPositive, w, n, cert, Seed::upper_boundary);
      CHECK(angle(es_low.direction, es_high.direction) <= es.error_bound * (1 + 1e-9));
      // e^s avoids M° while e^ss sits at least `margin` inside M.
      CHECK(angle(es.direction, ess.direction) >= cert.margin - es.error_bound - ess.error_bound);
    }
  }
  CHECK_THROWS_AS(strong_stable_direction(kPositive, Word{0, 1}, 3, cert), std::invalid_argument);
  SplittingCertificate bad = cert;
  bad.margin = 0.0;
  CHECK_THROWS_AS(strong_stable_direction(kPositive, Word{0, 1}, 2, bad), std::invalid_argument);
}

TEST_CASE("property: equivariance A e(i) = e(shifted i)") {
  const auto cert = certify(kPositive);
  std::mt19937_64 rng(22);
  const std::size_t n = 14;
  for (int i = 0; i < 100; ++i) {
    const Word w = random_word(rng, n + 1, 2);
    // Future: A_{i₀} e^ss(i₀ i₁ …) = e^ss(i₁ …).
    const auto ess = strong_stable_direction(kPositive, w, n + 1, cert);
    const Word shifted(w.begin() + 1, w.end());
    const auto ess_shift = strong_stable_direction(kPositive, shifted, n, cert);
    CHECK(angle(apply(kPositive[w[0]], ess.direction), ess_shift.direction) <=
          ess_shift.error_bound + cert.error_bound(n + 1) + 1e-12);
    // Past: A_{i₋₁} e^s(… i₋₂) = e^s(… i₋₂ i₋₁).
    const Word older(w.begin(), w.end() - 1);
    const auto es_old = stable_direction(kPositive, older, n, cert);
    const auto es = stable_direction(kPositive, w, n, cert);
    CHECK(angle(apply(kPositive[w.back()], es_old.direction), es.direction) <=
          es.error_bound + cert.error_bound(n + 1) + 1e-12);
  }
}

TEST_CASE("property: restricted norm along e^s is comparable to alpha1") {
  const auto cert = certify(kPositive);
  const double c_prime = 1.0 / std::sin(cert.margin);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const Word w = random_word(rng, 40, 2);
    const std::span<const Symbol> ws(w);
    const auto es = stable_direction(kPositive, ws.first(30), 30, cert).direction;
    const Mat2 p = word_product(ws.subspan(30), kPositive, ProductOrder::reversed);
    const double ratio = restricted_norm(p, es) / largest_singular_value(p);
    CHECK(ratio <= 1.0 + 1e-12);
    CHECK(ratio >= 1.0 / c_prime);
  }
}

TEST_CASE("property: certificates survive doubled boundary sampling") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.05, 0.45);
  int certified = 0;
  for (int i = 0; i < 50; ++i) {
    std::vector<Mat2> sys;
    for (int j = 0; j < 2; ++j) {
      sys.push_back({u(rng), u(rng) - 0.25, u(rng) - 0.25, u(rng)});
    }
    SplittingOptions opts;
    const auto search = find_backward_invariant_multicone(sys, opts);
    if (search.certificate) {
      ++certified;
      CHECK(sampled_invariance_margin(sys, search.certificate->cone, 2 * opts.boundary_samples) > 0.0);
      CHECK(backward_invariance_margin(sys, search.certificate->cone) > 0.0);
    }
  }
  CHECK(certified > 0);
}

TEST_CASE("Holder check") {
  std::mt19937_64 rng(25);
  const auto diag = holder_direction_check(kDiag, certify(kDiag), 16, 100, rng);
  CHECK(diag.passed);
  for (double a : diag.max_angle_by_agreement) {
    CHECK(a == 0.0);
  }
  const auto cert = certify(kPositive);
  const auto pos = holder_direction_check(kPositive, cert, 16, 200, rng);
  CHECK(pos.passed);
  CHECK(pos.slope <= -cert.beta / 2);
  CHECK(pos.max_angle_by_agreement[0] <= kPi / 2);
  for (std::size_t k = 2; k <= 8; ++k) {
    CHECK(pos.max_angle_by_agreement[k] < pos.max_angle_by_agreement[k - 1]);
  }
  for (std::size_t k = 1; k <= 8; ++k) {
    CHECK(pos.max_angle_by_agreement[k] <= pos.fitted_constant * std::exp(-cert.beta * k) * (1 + 1e-9));
  }
}
