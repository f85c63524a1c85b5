#pragma once

#include <cstddef>
#include <vector>

namespace advreg {

using Vec = std::vector<double>;

// Collapses -0.0 to +0.0 so bitwise point comparisons treat them as equal.
inline double canon_zero(double v) { return v == 0.0 ? 0.0 : v; }

// Finite evaluation lattice over a box in R^d. Regular grids are axis-uniform
// products built from per-axis resolutions; irregular ones hold an explicit,
// lexicographically sorted point list (used for inflated domains, whose points
// are sums x + delta and generally not axis-uniform). Points are stored in
// row-major order (first axis slowest), which fixes argmax tie-breaking.
class GridDomain {
 public:
  GridDomain() = default;

  // Axis-uniform lattice with pts[k] points on axis k over [lo[k], hi[k]].
  static GridDomain regular(std::vector<int> pts_per_axis, Vec lo, Vec hi);
  // Convenience: the unit cube [0,1]^d with the same resolution on every axis.
  static GridDomain unit_cube(int dim, int pts_per_axis);
  // Sorts lexicographically and removes bitwise duplicates. spacing_hint is
  // carried along as the nominal resolution (normally the base grid spacing).
  static GridDomain from_points(std::vector<Vec> pts, Vec spacing_hint);

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  const Vec& point(std::size_t i) const { return points_[i]; }
  const std::vector<Vec>& points() const { return points_; }
  const Vec& lower() const { return lo_; }
  const Vec& upper() const { return hi_; }
  const Vec& spacing() const { return spacing_; }
  bool regular_grid() const { return regular_; }
  double max_spacing() const;

  // Index of the lattice point nearest to y (Euclidean; lowest index wins
  // ties). O(d) on regular grids, linear scan otherwise.
  std::size_t nearest(const Vec& y) const;
  bool in_bounds(const Vec& y, double tol) const;

  // Default per-axis resolution used by the experiment layer: 1025 (d=1),
  // 65 (d=2), 17 (d=3), 9 beyond.
  static int default_resolution(int dim);

 private:
  int dim_ = 0;
  std::vector<Vec> points_;
  Vec lo_, hi_, spacing_;
  std::vector<int> shape_;
  bool regular_ = false;
};

}  // namespace advreg
