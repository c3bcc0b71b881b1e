#include "affdim/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "affdim/splitting.hpp"

namespace affdim {

namespace {

constexpr std::size_t kDirections = 64;

struct Ellipse {
  Vec2 center;
  Mat2 shape;  // image of the unit disk, before scaling by R
  Symbol group;
};

double support(const Ellipse& e, double radius, const Vec2& u) {
  return dot(e.center, u) + radius * (e.shape.transpose() * u).norm();
}

std::array<Vec2, 2 * kDirections> direction_set() {
  std::array<Vec2, 2 * kDirections> dirs{};
  for (std::size_t k = 0; k < kDirections; ++k) {
    const double theta = std::numbers::pi * static_cast<double>(k) / kDirections;
    dirs[2 * k] = {std::cos(theta), std::sin(theta)};
    dirs[2 * k + 1] = {-std::cos(theta), -std::sin(theta)};
  }
  return dirs;
}

// Depth-d words in oldest-first order: point f_w(x0), linear part A_w, outermost symbol.
void enumerate_images(const AffineIFS& ifs, std::size_t depth, const Vec2& x0,
                      const std::function<void(std::size_t, const Vec2&, const Mat2&)>& fn) {
  const std::size_t n = ifs.size();
  std::function<void(std::size_t, std::size_t, const Vec2&, const Mat2&)> rec =
      [&](std::size_t level, std::size_t index, const Vec2& p, const Mat2& a) {
        if (level == depth) {
          fn(index, p, a);
          return;
        }
        for (Symbol j = 0; j < n; ++j) {
          rec(level + 1, index * n + j, ifs.apply(j, p), ifs.matrices[j] * a);
        }
      };
  rec(0, 0, x0, Mat2::identity());
}

bool ellipses_separated(const Ellipse& a, const Ellipse& b, double radius,
                        const std::array<Vec2, 2 * kDirections>& dirs, double slack) {
  const double ra = radius * largest_singular_value(a.shape);
  const double rb = radius * largest_singular_value(b.shape);
  if ((a.center - b.center).norm() > ra + rb + slack) {
    return true;
  }
  for (const Vec2& u : dirs) {
    if (support(a, radius, u) + support(b, radius, u * -1.0) < -slack) {
      return true;
    }
  }
  return false;
}

}  // namespace

void AffineIFS::validate() const {
  if (matrices.empty()) {
    throw std::invalid_argument("empty IFS");
  }
  if (translations.size() != matrices.size()) {
    throw std::invalid_argument("IFS needs one translation per matrix");
  }
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    const double norm = op_norm(matrices[i]);
    if (!(norm < 1.0)) {
      std::ostringstream msg;
      msg << "non-contracting matrix " << i + 1 << " (norm " << norm << ")";
      throw std::invalid_argument(msg.str());
    }
  }
}

Vec2 AffineIFS::fixed_point(Symbol i) const {
  const Mat2 m = Mat2::identity() + matrices.at(i) * -1.0;
  return m.inverse() * translations.at(i);
}

double AffineIFS::max_norm() const {
  double c = 0.0;
  for (const Mat2& m : matrices) {
    c = std::max(c, op_norm(m));
  }
  return c;
}

Disk bounding_disk(const AffineIFS& ifs) {
  ifs.validate();
  Vec2 c{0.0, 0.0};
  for (Symbol i = 0; i < ifs.size(); ++i) {
    c = c + ifs.fixed_point(i);
  }
  c = c * (1.0 / static_cast<double>(ifs.size()));
  double reach = 0.0;
  for (Symbol i = 0; i < ifs.size(); ++i) {
    reach = std::max(reach, (ifs.apply(i, c) - c).norm());
  }
  return {c, reach / (1.0 - ifs.max_norm())};
}

Projection2d natural_projection_2d(const AffineIFS& ifs, std::span<const Symbol> word, std::size_t n) {
  if (n > word.size()) {
    throw std::invalid_argument("natural_projection_2d: depth exceeds word length");
  }
  const Disk disk = bounding_disk(ifs);
  Vec2 p = disk.center;
  Mat2 a = Mat2::identity();
  for (std::size_t j = word.size() - n; j < word.size(); ++j) {
    if (word[j] >= ifs.size()) {
      throw std::out_of_range("symbol out of range");
    }
    p = ifs.apply(word[j], p);
    a = ifs.matrices[word[j]] * a;
  }
  return {p, largest_singular_value(a) * disk.radius};
}

std::string to_string(SscStatus s) {
  switch (s) {
    case SscStatus::verified:
      return "verified";
    case SscStatus::violated:
      return "violated";
    case SscStatus::undetermined:
      break;
  }
  return "undetermined";
}

SscResult check_ssc(const AffineIFS& ifs, std::size_t depth, std::size_t budget) {
  const Disk disk = bounding_disk(ifs);
  const std::size_t n = ifs.size();
  SscResult result;
  if (n < 2) {
    result.status = SscStatus::verified;
    result.message = "single map";
    return result;
  }
  const auto dirs = direction_set();
  const double tol = 1e-12 * std::max(1.0, disk.radius);
  const Vec2 anchor = ifs.fixed_point(0);

  for (std::size_t d = 1; d <= depth; ++d) {
    if (std::pow(static_cast<double>(n), static_cast<double>(d)) > static_cast<double>(budget)) {
      break;
    }
    result.depth = d;
    std::vector<Ellipse> ellipses;
    std::vector<std::pair<Vec2, Symbol>> lambda_points;
    enumerate_images(ifs, d, disk.center, [&](std::size_t index, const Vec2& p, const Mat2& a) {
      ellipses.push_back({p, a, static_cast<Symbol>(index % n)});
    });
    enumerate_images(ifs, d, anchor, [&](std::size_t index, const Vec2& p, const Mat2&) {
      lambda_points.emplace_back(p, static_cast<Symbol>(index % n));
    });

    // Group hulls: max support per outermost map and direction.
    std::vector<std::vector<double>> hull(n, std::vector<double>(dirs.size(), -std::numeric_limits<double>::infinity()));
    for (const Ellipse& e : ellipses) {
      for (std::size_t k = 0; k < dirs.size(); ++k) {
        hull[e.group][k] = std::max(hull[e.group][k], support(e, disk.radius, dirs[k]));
      }
    }
    bool all_separated = true;
    for (Symbol g1 = 0; g1 < n && all_separated; ++g1) {
      for (Symbol g2 = g1 + 1; g2 < n && all_separated; ++g2) {
        bool separated = false;
        for (std::size_t k = 0; k < dirs.size() && !separated; ++k) {
          const std::size_t opposite = k ^ 1U;
          separated = hull[g1][k] + hull[g2][opposite] < -tol;
        }
        if (separated) {
          continue;
        }
        const std::size_t group_size = ellipses.size() / n;
        if (group_size * group_size > (std::size_t{1} << 22)) {
          all_separated = false;
          break;
        }
        for (const Ellipse& a : ellipses) {
          if (a.group != g1) {
            continue;
          }
          for (const Ellipse& b : ellipses) {
            if (b.group == g2 && !ellipses_separated(a, b, disk.radius, dirs, tol)) {
              all_separated = false;
              break;
            }
          }
          if (!all_separated) {
            break;
          }
        }
      }
    }
    if (all_separated) {
      result.status = SscStatus::verified;
      std::ostringstream msg;
      msg << "images of the bounding disk under distinct outermost maps are separated at depth " << d;
      result.message = msg.str();
      return result;
    }

    std::sort(lambda_points.begin(), lambda_points.end(),
              [](const auto& x, const auto& y) { return x.first.x < y.first.x; });
    for (std::size_t i = 0; i < lambda_points.size(); ++i) {
      for (std::size_t j = i + 1; j < lambda_points.size() && lambda_points[j].first.x - lambda_points[i].first.x <= tol;
           ++j) {
        if (lambda_points[i].second != lambda_points[j].second &&
            (lambda_points[i].first - lambda_points[j].first).norm() <= tol) {
          result.status = SscStatus::violated;
          result.first = std::min(lambda_points[i].second, lambda_points[j].second);
          result.second = std::max(lambda_points[i].second, lambda_points[j].second);
          std::ostringstream msg;
          msg << "maps " << result.first + 1 << " and " << result.second + 1 << " share an attractor point at depth "
              << d;
          result.message = msg.str();
          return result;
        }
      }
    }
  }
  result.message = "neither separation nor a common point found up to the depth limit";
  return result;
}

PointCloud generate_cloud(const AffineIFS& ifs, std::size_t depth, std::size_t budget) {
  PointCloud cloud;
  cloud.depth = depth;
  cloud.alphabet = ifs.size();
  cloud.disk = bounding_disk(ifs);
  cloud.contraction = ifs.max_norm();
  const std::size_t count = word_count_checked(ifs.size(), depth, budget);
  cloud.points.resize(count);
  enumerate_images(ifs, depth, cloud.disk.center, [&](std::size_t index, const Vec2& p, const Mat2& a) {
    cloud.points[index] = p;
    cloud.max_error = std::max(cloud.max_error, largest_singular_value(a) * cloud.disk.radius);
  });
  return cloud;
}

namespace {

std::size_t occupied_cells(const PointCloud& cloud, double eps) {
  const double ax = cloud.disk.center.x - cloud.disk.radius;
  const double ay = cloud.disk.center.y - cloud.disk.radius;
  std::vector<std::pair<long long, long long>> cells;
  cells.reserve(cloud.points.size());
  for (const Vec2& p : cloud.points) {
    cells.emplace_back(static_cast<long long>(std::floor((p.x - ax) / eps)),
                       static_cast<long long>(std::floor((p.y - ay) / eps)));
  }
  std::sort(cells.begin(), cells.end());
  return static_cast<std::size_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
}

std::size_t depth_for_scale(const PointCloud& cloud, double eps) {
  if (!(cloud.contraction > 0.0 && cloud.contraction < 1.0) || !(cloud.disk.radius > 0.0)) {
    return cloud.depth;
  }
  return static_cast<std::size_t>(std::ceil(std::log(eps / cloud.disk.radius) / std::log(cloud.contraction)));
}

}  // namespace

BoxCount box_dimension_estimate(const PointCloud& cloud, std::span<const double> scales) {
  if (cloud.points.empty()) {
    throw std::invalid_argument("box_dimension_estimate: empty cloud");
  }
  BoxCount out;
  if (scales.empty()) {
    // A zero radius means the attractor is a single point; any scale will do.
    const bool point = !(cloud.disk.radius > 0.0);
    const double span_2r = point ? 1.0 : 2.0 * cloud.disk.radius;
    const std::size_t saturation = std::max<std::size_t>(cloud.points.size() / 8, 1);
    for (int j = 3; j <= (point ? 10 : 48); ++j) {
      const double eps = span_2r * std::ldexp(1.0, -j);
      if (eps < 4.0 * cloud.max_error) {
        break;
      }
      const std::size_t count = occupied_cells(cloud, eps);
      out.scales.push_back(eps);
      out.counts.push_back(count);
      if (count > saturation) {
        break;
      }
    }
    if (out.scales.size() < 2) {
      std::ostringstream msg;
      msg << "insufficient resolution: cloud depth " << cloud.depth << " resolves fewer than two scales; need depth >= "
          << depth_for_scale(cloud, span_2r * std::ldexp(1.0, -5) / 4.0);
      throw std::invalid_argument(msg.str());
    }
  } else {
    const double smallest = *std::min_element(scales.begin(), scales.end());
    if (!(cloud.max_error < smallest)) {
      std::ostringstream msg;
      msg << "insufficient resolution: error radius " << cloud.max_error << " exceeds scale " << smallest
          << "; need depth >= " << depth_for_scale(cloud, smallest);
      throw std::invalid_argument(msg.str());
    }
    for (double eps : scales) {
      if (!(eps > 0.0)) {
        throw std::invalid_argument("box_dimension_estimate: scales must be positive");
      }
      out.scales.push_back(eps);
      out.counts.push_back(occupied_cells(cloud, eps));
    }
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < out.scales.size(); ++i) {
    xs.push_back(-std::log(out.scales[i]));
    ys.push_back(std::log(static_cast<double>(out.counts[i])));
  }
  const LinearFit fit = least_squares(xs, ys);
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.residuals.push_back(ys[i] - (fit.slope * xs[i] + fit.intercept));
  }
  return out;
}

void write_csv(std::ostream& out, const PointCloud& cloud) {
  out << "x,y,word\n";
  char buf[64];
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,", cloud.points[i].x, cloud.points[i].y);
    out << buf << format_word(decode_word(i, cloud.alphabet, cloud.depth), cloud.alphabet) << '\n';
  }
}

void write_svg(std::ostream& out, const PointCloud& cloud) {
  const double x0 = cloud.disk.center.x - cloud.disk.radius;
  const double y0 = cloud.disk.center.y - cloud.disk.radius;
  const double scale = cloud.disk.radius > 0.0 ? 1000.0 / (2.0 * cloud.disk.radius) : 1.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\" width=\"1000\" height=\"1000\">\n"
      << "<rect width=\"1000\" height=\"1000\" fill=\"white\"/>\n<g fill=\"black\">\n";
  char buf[96];
  for (const Vec2& p : cloud.points) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"1\"/>\n", (p.x - x0) * scale,
                  1000.0 - (p.y - y0) * scale);
    out << buf;
  }
  out << "</g>\n</svg>\n";
}

}  // namespace affdim
