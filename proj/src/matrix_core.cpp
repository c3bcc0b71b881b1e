#include "affdim/matrix_core.hpp"

#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace affdim {

Mat2 Mat2::inverse() const {
  const double det_value = det();
  if (det_value == 0.0) {
    throw std::domain_error("singular matrix");
  }
  const double inv = 1.0 / det_value;
  return {d * inv, -b * inv, -c * inv, a * inv};
}

double largest_singular_value(const Mat2& m) {
  // AAᵀ = [[p, q], [q, r]]
  const double p = m.a * m.a + m.b * m.b;
  const double q = m.a * m.c + m.b * m.d;
  const double r = m.c * m.c + m.d * m.d;
  return std::sqrt(0.5 * (p + r + std::hypot(p - r, 2.0 * q)));
}

SingularValues singular_values(const Mat2& m, double det) {
  const double det_abs = std::abs(det);
  if (det_abs == 0.0) {
    throw std::domain_error("singular matrix");
  }
  const double largest = largest_singular_value(m);
  return {largest, det_abs / largest};
}

SingularValues singular_values(const Mat2& m) { return singular_values(m, m.det()); }

double wrap_projective(double theta) {
  constexpr double pi = std::numbers::pi;
  double t = std::fmod(theta, pi);
  if (t < 0.0) {
    t += pi;
  }
  if (t >= pi) {
    t = 0.0;
  }
  return t;
}

ProjPoint::ProjPoint(const Vec2& v) {
  if (v.x == 0.0 && v.y == 0.0) {
    throw std::invalid_argument("zero vector does not span a line");
  }
  theta_ = wrap_projective(std::atan2(v.y, v.x));
}

ProjPoint ProjPoint::from_angle(double theta) {
  ProjPoint p;
  p.theta_ = wrap_projective(theta);
  return p;
}

bool ProjPoint::approx_equal(const ProjPoint& o, double tol) const {
  return std::abs(std::sin(theta_ - o.theta_)) <= tol;
}

double angle(const ProjPoint& x, const ProjPoint& y) {
  const double d = std::abs(x.theta() - y.theta());
  return std::min(d, std::numbers::pi - d);
}

double restricted_norm(const Mat2& m, const ProjPoint& line) { return (m * line.unit()).norm(); }

Mat2 word_product(std::span<const Symbol> word, std::span<const Mat2> matrices, ProductOrder order) {
  Mat2 acc = Mat2::identity();
  for (std::size_t i = 0; i < word.size(); ++i) {
    const Symbol s = word[i];
    if (s >= matrices.size()) {
      throw std::out_of_range("symbol " + std::to_string(s + 1) + " out of range for " +
                              std::to_string(matrices.size()) + " matrices");
    }
    acc = order == ProductOrder::forward ? acc * matrices[s] : matrices[s] * acc;
  }
  return acc;
}

std::size_t word_count_checked(std::size_t alphabet, std::size_t depth, std::size_t budget) {
  std::size_t count = 1;
  for (std::size_t i = 0; i < depth; ++i) {
    if (count > budget / std::max<std::size_t>(alphabet, 1)) {
      std::ostringstream msg;
      msg << std::fixed << std::setprecision(0) << "enumeration budget exceeded: " << alphabet << "^" << depth
          << " = " << std::pow(static_cast<double>(alphabet), static_cast<double>(depth))
          << " words requested, budget " << budget;
      throw std::length_error(msg.str());
    }
    count *= alphabet;
  }
  if (count > budget) {
    std::ostringstream msg;
    msg << "enumeration budget exceeded: " << count << " words requested, budget " << budget;
    throw std::length_error(msg.str());
  }
  return count;
}

Word decode_word(std::size_t index, std::size_t alphabet, std::size_t depth) {
  Word w(depth);
  for (std::size_t i = depth; i-- > 0;) {
    w[i] = static_cast<Symbol>(index % alphabet);
    index /= alphabet;
  }
  return w;
}

std::size_t encode_word(std::span<const Symbol> word, std::size_t alphabet) {
  std::size_t idx = 0;
  for (Symbol s : word) {
    idx = idx * alphabet + s;
  }
  return idx;
}

std::string format_word(std::span<const Symbol> word, std::size_t alphabet) {
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (alphabet > 9 && i > 0) {
      out += '.';
    }
    out += std::to_string(word[i] + 1);
  }
  return out;
}

Word parse_word(const std::string& text, std::size_t alphabet) {
  Word w;
  auto push = [&](unsigned long v) {
    if (v < 1 || v > alphabet) {
      throw std::invalid_argument("symbol " + std::to_string(v) + " outside 1.." + std::to_string(alphabet) +
                                  " in word '" + text + "'");
    }
    w.push_back(static_cast<Symbol>(v - 1));
  };
  if (text.empty()) {
    throw std::invalid_argument("empty word");
  }
  if (alphabet <= 9 && text.find('.') == std::string::npos) {
    for (char ch : text) {
      if (ch < '0' || ch > '9') {
        throw std::invalid_argument("malformed word '" + text + "'");
      }
      push(static_cast<unsigned long>(ch - '0'));
    }
    return w;
  }
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, '.')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("malformed word '" + text + "'");
    }
    push(std::stoul(part));
  }
  return w;
}

}  // namespace affdim
