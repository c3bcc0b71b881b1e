#pragma once

// 2x2 real linear algebra, projective lines and symbolic words.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace affdim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {k * x, k * y}; }
};

inline double dot(const Vec2& v, const Vec2& w) { return v.x * w.x + v.y * w.y; }
inline double cross(const Vec2& v, const Vec2& w) { return v.x * w.y - v.y * w.x; }

/// Area of the parallelogram spanned by v and w.
inline double area(const Vec2& v, const Vec2& w) { return std::abs(cross(v, w)); }

/// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 diag(double p, double q) { return {p, 0.0, 0.0, q}; }

  double det() const { return a * d - b * c; }
  Mat2 transpose() const { return {a, c, b, d}; }
  /// Throws std::domain_error("singular matrix") when det == 0.
  Mat2 inverse() const;

  /// ‖A‖_∞ = max row sum of absolute values.
  double norm_inf() const { return std::max(std::abs(a) + std::abs(b), std::abs(c) + std::abs(d)); }
  /// ⦀A⦀ = min row sum of absolute values.
  double min_row_sum() const { return std::min(std::abs(a) + std::abs(b), std::abs(c) + std::abs(d)); }
  double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }

  bool strictly_positive() const { return a > 0 && b > 0 && c > 0 && d > 0; }
  bool strictly_negative() const { return a < 0 && b < 0 && c < 0 && d < 0; }
  bool sign_definite() const { return strictly_positive() || strictly_negative(); }

  Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 operator*(const Mat2& m) const {
    return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
  }
  Mat2 operator+(const Mat2& m) const { return {a + m.a, b + m.b, c + m.c, d + m.d}; }
  Mat2 operator*(double k) const { return {k * a, k * b, k * c, k * d}; }

  bool operator==(const Mat2&) const = default;
};

struct SingularValues {
  double largest;   // α₁ = ‖A‖
  double smallest;  // α₂ = ‖A⁻¹‖⁻¹
};

/// Closed-form singular values from the eigenvalues of AAᵀ.
/// α₂ is taken as |det A| / α₁ so that α₁α₂ = |det A| holds to rounding.
SingularValues singular_values(const Mat2& m);
/// Same, with det A supplied by the caller (e.g. accumulated along a word).
SingularValues singular_values(const Mat2& m, double det);

/// α₁ alone; defined for singular matrices too.
double largest_singular_value(const Mat2& m);

/// Operator 2-norm.
inline double op_norm(const Mat2& m) { return largest_singular_value(m); }

/// A line through the origin in ℝ², stored by its angle in [0, π).
class ProjPoint {
 public:
  ProjPoint() = default;
  /// Throws std::invalid_argument for the zero vector.
  explicit ProjPoint(const Vec2& v);
  static ProjPoint from_angle(double theta);

  double theta() const { return theta_; }
  Vec2 unit() const { return {std::cos(theta_), std::sin(theta_)}; }

  /// Equality up to |sin(Δθ)| ≤ tol.
  bool approx_equal(const ProjPoint& o, double tol = 1e-12) const;

 private:
  double theta_ = 0.0;
};

/// Reduce an angle into [0, π).
double wrap_projective(double theta);

/// The metric ∢ on 𝐏¹: angle between the two lines, in [0, π/2].
double angle(const ProjPoint& x, const ProjPoint& y);

/// ‖A|θ‖ = ‖Av‖/‖v‖ for nonzero v ∈ θ.
double restricted_norm(const Mat2& m, const ProjPoint& line);

/// Image of a line under a non-singular matrix.
inline ProjPoint apply(const Mat2& m, const ProjPoint& line) { return ProjPoint(m * line.unit()); }

/// Symbols are 0-based internally; user-facing formats print them 1-based.
using Symbol = std::uint32_t;
using Word = std::vector<Symbol>;

enum class ProductOrder {
  forward,   // A_{w₁}···A_{wₙ}
  reversed,  // A_{wₙ}···A_{w₁}
};

/// Throws std::out_of_range when a symbol has no matrix.
Mat2 word_product(std::span<const Symbol> word, std::span<const Mat2> matrices, ProductOrder order);

/// N^n, or throws std::length_error naming the requested size if it exceeds `budget`.
std::size_t word_count_checked(std::size_t alphabet, std::size_t depth, std::size_t budget);

/// Decode a word index (most significant symbol first) of the given length.
Word decode_word(std::size_t index, std::size_t alphabet, std::size_t depth);
std::size_t encode_word(std::span<const Symbol> word, std::size_t alphabet);

/// Depth-first walk over all words of length 1..depth, carrying the partial
/// product and its determinant (multiplied symbol by symbol, since det of a
/// long dominated product cannot be recovered from its entries).
/// `fn(length, index, product, det)` is called for every prefix, where
/// `index` encodes the prefix most-significant-symbol first. Restricting the
/// first symbol lets callers split the tree across workers.
template <class Fn>
void visit_word_tree(std::span<const Mat2> system, std::size_t depth, ProductOrder order, Fn&& fn,
                     std::optional<Symbol> first = std::nullopt) {
  const std::size_t n_symbols = system.size();
  auto rec = [&](auto& self, std::size_t level, std::size_t index, const Mat2& acc, double det) -> void {
    if (level == depth) {
      return;
    }
    Symbol lo = 0;
    Symbol hi = static_cast<Symbol>(n_symbols);
    if (level == 0 && first) {
      lo = *first;
      hi = *first + 1;
    }
    for (Symbol s = lo; s < hi; ++s) {
      const Mat2 next = order == ProductOrder::forward ? acc * system[s] : system[s] * acc;
      const double next_det = det * system[s].det();
      const std::size_t next_index = index * n_symbols + s;
      fn(level + 1, next_index, next, next_det);
      self(self, level + 1, next_index, next, next_det);
    }
  };
  rec(rec, 0, 0, Mat2::identity(), 1.0);
}

/// `fn(index, product, det)` for every word of exactly the given length.
template <class Fn>
void for_each_word_product(std::span<const Mat2> system, std::size_t depth, ProductOrder order, Fn&& fn,
                           std::optional<Symbol> first = std::nullopt) {
  if (depth == 0) {
    fn(std::size_t{0}, Mat2::identity(), 1.0);
    return;
  }
  visit_word_tree(
      system, depth, order,
      [&](std::size_t level, std::size_t index, const Mat2& product, double det) {
        if (level == depth) {
          fn(index, product, det);
        }
      },
      first);
}

/// "121" for alphabets up to 9 symbols, "1.2.10" otherwise. Symbols printed 1-based.
std::string format_word(std::span<const Symbol> word, std::size_t alphabet);
/// Inverse of format_word; throws std::invalid_argument on malformed input.
Word parse_word(const std::string& text, std::size_t alphabet);

}  // namespace affdim
