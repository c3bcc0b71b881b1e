#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "affdim/matrix_core.hpp"

using namespace affdim;
using doctest::Approx;

namespace {

Mat2 random_matrix(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat2 m;
  do {
    m = {u(rng), u(rng), u(rng), u(rng)};
  } while (std::abs(m.det()) < 1e-3);
  return m;
}

}  // namespace

TEST_CASE("singular values of diagonal and permuted diagonal matrices") {
  const auto d = singular_values(Mat2::diag(0.5, 0.25));
  CHECK(d.largest == Approx(0.5).epsilon(1e-15));
  CHECK(d.smallest == Approx(0.25).epsilon(1e-15));
  const auto p = singular_values({0.0, 0.5, 0.25, 0.0});
  CHECK(p.largest == Approx(0.5).epsilon(1e-15));
  CHECK(p.smallest == Approx(0.25).epsilon(1e-15));
}

TEST_CASE("singular values of a positive matrix") {
  const Mat2 a{0.5, 0.4, 0.1, 0.1};
  const auto sv = singular_values(a);
  // α₁² is the top eigenvalue of AAᵀ = [[0.41, 0.09], [0.09, 0.02]].
  const double top = 0.5 * (0.43 + std::sqrt(0.39 * 0.39 + 4 * 0.09 * 0.09));
  CHECK(sv.largest == Approx(std::sqrt(top)).epsilon(1e-14));
  CHECK(sv.largest == Approx(0.655566).epsilon(1e-6));
  // α₁α₂ = |det| = 0.01 forces α₂ ≈ 0.015254.
  CHECK(sv.smallest == Approx(0.0152540).epsilon(1e-5));
  CHECK(sv.largest * sv.smallest == Approx(0.01).epsilon(1e-14));
}

TEST_CASE("singular input is rejected") {
  CHECK_THROWS_WITH_AS(singular_values({1.0, 2.0, 2.0, 4.0}), "singular matrix", std::domain_error);
  CHECK_THROWS_WITH_AS(Mat2({1.0, 2.0, 2.0, 4.0}).inverse(), "singular matrix", std::domain_error);
}

TEST_CASE("determinant carried along a long dominated product") {
  const Mat2 a{0.5, 0.4, 0.1, 0.1};
  Mat2 p = Mat2::identity();
  double det = 1.0;
  for (int i = 0; i < 40; ++i) {
    p = p * a;
    det *= a.det();
  }
  const auto sv = singular_values(p, det);
  CHECK(sv.smallest > 0.0);
  CHECK(sv.largest * sv.smallest == Approx(std::abs(det)).epsilon(1e-12));
}

TEST_CASE("restricted norm") {
  const Mat2 a = Mat2::diag(0.5, 0.25);
  CHECK(restricted_norm(a, ProjPoint({1, 0})) == Approx(0.5));
  CHECK(restricted_norm(a, ProjPoint({0, 1})) == Approx(0.25));
  CHECK(restricted_norm(a, ProjPoint({1, 1})) == Approx(0.395285).epsilon(1e-6));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Mat2 m = random_matrix(rng);
    const auto sv = singular_values(m);
    const double r = restricted_norm(m, ProjPoint::from_angle(0.1 * i));
    CHECK(r >= sv.smallest * (1 - 1e-12));
    CHECK(r <= sv.largest * (1 + 1e-12));
  }
}

TEST_CASE("angle examples and area sandwich") {
  const ProjPoint e1({1, 0});
  const ProjPoint e2({0, 1});
  const ProjPoint diag({1, 1});
  CHECK(angle(e1, e2) == Approx(std::numbers::pi / 2));
  CHECK(angle(e1, e1) == 0.0);
  CHECK(angle(e1, diag) == Approx(0.785398).epsilon(1e-6));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> th(0.0, std::numbers::pi);
  for (int i = 0; i < 1000; ++i) {
    const ProjPoint x = ProjPoint::from_angle(th(rng));
    const ProjPoint y = ProjPoint::from_angle(th(rng));
    const double ar = area(x.unit(), y.unit());
    const double a = angle(x, y);
    CHECK(a >= 0.0);
    CHECK(a <= std::numbers::pi / 2 + 1e-15);
    CHECK(ar <= a + 1e-15);
    CHECK(a <= 2 * ar + 1e-15);
  }
}

TEST_CASE("projective points identify v with -v") {
  const ProjPoint a({0.3, -0.7});
  const ProjPoint b({-0.3, 0.7});
  CHECK(a.approx_equal(b));
  CHECK(angle(a, b) == Approx(0.0).epsilon(1e-15));
  CHECK(a.unit().norm() == Approx(1.0));
  CHECK_THROWS_AS(ProjPoint({0, 0}), std::invalid_argument);
}

TEST_CASE("property: alpha1 alpha2 = |det| and alpha1 is the max stretch") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Mat2 m = random_matrix(rng);
    const auto sv = singular_values(m);
    CHECK(sv.largest >= sv.smallest);
    CHECK(sv.largest * sv.smallest == Approx(std::abs(m.det())).epsilon(1e-10));
    double best = 0.0;
    for (int k = 0; k < 360; ++k) {
      const double t = std::numbers::pi * k / 360.0;
      best = std::max(best, (m * Vec2{std::cos(t), std::sin(t)}).norm());
    }
    CHECK(std::abs(best - sv.largest) <= 1e-4);
    CHECK(sv.smallest == Approx(1.0 / op_norm(m.inverse())).epsilon(1e-10));
  }
}

TEST_CASE("property: angle is a metric") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> th(0.0, std::numbers::pi);
  for (int i = 0; i < 1000; ++i) {
    const ProjPoint x = ProjPoint::from_angle(th(rng));
    const ProjPoint y = ProjPoint::from_angle(th(rng));
    const ProjPoint z = ProjPoint::from_angle(th(rng));
    CHECK(angle(x, y) == Approx(angle(y, x)).epsilon(1e-15));
    CHECK(angle(x, x) == 0.0);
    CHECK(angle(x, z) <= angle(x, y) + angle(y, z) + 1e-14);
  }
  CHECK(angle(ProjPoint::from_angle(0.0), ProjPoint::from_angle(std::numbers::pi - 1e-9)) == Approx(1e-9));
}

TEST_CASE("word products in both orders") {
  const std::vector<Mat2> one{Mat2::diag(0.5, 0.25)};
  const Word w1{0};
  CHECK(word_product(w1, one, ProductOrder::forward) == one[0]);

  const std::vector<Mat2> diag{Mat2::diag(0.5, 0.25), Mat2::diag(1.0 / 3, 0.2)};
  const Word w12{0, 1};
  const Mat2 p = word_product(w12, diag, ProductOrder::forward);
  CHECK(p.a == Approx(1.0 / 6));
  CHECK(p.d == Approx(1.0 / 20));
  CHECK(p.b == 0.0);

  const std::vector<Mat2> mixed{{0.0, 0.5, 0.25, 0.0}, Mat2::diag(1.0 / 3, 0.2)};
  const Mat2 f = word_product(w12, mixed, ProductOrder::forward);
  const Mat2 r = word_product(w12, mixed, ProductOrder::reversed);
  CHECK(f.a == 0.0);
  CHECK(f.b == Approx(0.1));
  CHECK(f.c == Approx(1.0 / 12));
  CHECK(f.d == 0.0);
  CHECK_FALSE(f == r);

  const Word bad{0, 2};
  CHECK_THROWS_AS(word_product(bad, mixed, ProductOrder::forward), std::out_of_range);
}

TEST_CASE("property: word products are associative in matching order") {
  std::mt19937_64 rng(5);
  std::vector<Mat2> sys;
  for (int i = 0; i < 3; ++i) {
    sys.push_back(random_matrix(rng));
  }
  std::uniform_int_distribution<Symbol> pick(0, 2);
  for (int i = 0; i < 200; ++i) {
    Word u(1 + i % 5);
    Word v(1 + i % 7);
    for (auto& s : u) s = pick(rng);
    for (auto& s : v) s = pick(rng);
    Word uv = u;
    uv.insert(uv.end(), v.begin(), v.end());
    const Mat2 f = word_product(u, sys, ProductOrder::forward) * word_product(v, sys, ProductOrder::forward);
    const Mat2 g = word_product(uv, sys, ProductOrder::forward);
    const Mat2 r = word_product(v, sys, ProductOrder::reversed) * word_product(u, sys, ProductOrder::reversed);
    const Mat2 h = word_product(uv, sys, ProductOrder::reversed);
    CHECK(f.a == Approx(g.a).epsilon(1e-12));
    CHECK(f.d == Approx(g.d).epsilon(1e-12));
    CHECK(r.b == Approx(h.b).epsilon(1e-12));
    CHECK(r.c == Approx(h.c).epsilon(1e-12));
  }
}

TEST_CASE("word enumeration matches explicit products") {
  const std::vector<Mat2> sys{{0.5, 0.4, 0.1, 0.1}, {0.3, 0.2, 0.25, 0.4}};
  std::size_t count = 0;
  for_each_word_product(sys, 5, ProductOrder::forward, [&](std::size_t idx, const Mat2& p, double det) {
    const Word w = decode_word(idx, 2, 5);
    const Mat2 q = word_product(w, sys, ProductOrder::forward);
    CHECK(p.a == Approx(q.a).epsilon(1e-14));
    CHECK(det == Approx(q.det()).epsilon(1e-9));
    CHECK(encode_word(w, 2) == idx);
    ++count;
  });
  CHECK(count == 32);
  CHECK_THROWS_AS(word_count_checked(2, 30, 1 << 20), std::length_error);
}

TEST_CASE("word formatting is 1-based and round-trips") {
  const Word w{0, 1, 1};
  CHECK(format_word(w, 2) == "122");
  CHECK(parse_word("122", 2) == w);
  const Word big{9, 0};
  CHECK(format_word(big, 12) == "10.1");
  CHECK(parse_word("10.1", 12) == big);
  CHECK_THROWS_AS(parse_word("13", 2), std::invalid_argument);
}
