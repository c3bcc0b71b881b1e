#pragma once

// Planar affine IFS: natural projection of pasts, strong separation check,
// point clouds, box counting, CSV and SVG output.

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "affdim/matrix_core.hpp"

namespace affdim {

struct AffineIFS {
  std::vector<Mat2> matrices;
  std::vector<Vec2> translations;

  std::size_t size() const { return matrices.size(); }
  /// Throws std::invalid_argument on mismatched lists or some ‖A_i‖ ≥ 1.
  void validate() const;
  Vec2 apply(Symbol i, const Vec2& x) const { return matrices[i] * x + translations[i]; }
  /// (I − A_i)⁻¹ t_i
  Vec2 fixed_point(Symbol i) const;
  double max_norm() const;
};

struct Disk {
  Vec2 center;
  double radius = 0.0;
};

/// c = mean of the fixed points, R = max‖t_i − (I − A_i)c‖ / (1 − max‖A_i‖);
/// then f_i(B(c, R)) ⊆ B(c, R) for all i.
Disk bounding_disk(const AffineIFS& ifs);

struct Projection2d {
  Vec2 point;
  double error = 0.0;  // α₁(A_{i₋₁}···A_{i₋ₙ})·R
};

/// f_{i₋₁} ∘ … ∘ f_{i₋ₙ}(c) for the past (i₋ₙ, …, i₋₁) stored oldest-first;
/// uses the last n symbols.
Projection2d natural_projection_2d(const AffineIFS& ifs, std::span<const Symbol> word, std::size_t n);

enum class SscStatus { verified, violated, undetermined };

struct SscResult {
  SscStatus status = SscStatus::undetermined;
  std::size_t depth = 0;
  Symbol first = 0;  // offending pair of outermost maps when violated
  Symbol second = 0;
  std::string message;
};

std::string to_string(SscStatus s);

/// Separates the depth-d ellipses f_w(B), grouped by the outermost map, for
/// d = 1..depth. Violated when points of Λ under distinct outermost maps coincide.
SscResult check_ssc(const AffineIFS& ifs, std::size_t depth, std::size_t budget = std::size_t{1} << 16);

struct PointCloud {
  std::size_t depth = 0;
  std::size_t alphabet = 0;
  std::vector<Vec2> points;  // index = encode_word of the past, oldest-first
  double max_error = 0.0;
  Disk disk;
  double contraction = 0.0;  // max‖A_i‖
};

/// One point per depth-n word. Throws std::length_error past the budget.
PointCloud generate_cloud(const AffineIFS& ifs, std::size_t depth, std::size_t budget = std::size_t{1} << 22);

struct BoxCount {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> scales;
  std::vector<std::size_t> counts;
  std::vector<double> residuals;
};

/// Occupied grid cells anchored at c − (R, R) for each scale; slope of
/// log count against log(1/ε). Empty `scales` picks dyadic scales 2R·2^{−j}
/// down to where the cloud stops resolving them.
/// Throws std::invalid_argument naming the required depth when the cloud is
/// coarser than the smallest scale.
BoxCount box_dimension_estimate(const PointCloud& cloud, std::span<const double> scales = {});

void write_csv(std::ostream& out, const PointCloud& cloud);
void write_svg(std::ostream& out, const PointCloud& cloud);

}  // namespace affdim
