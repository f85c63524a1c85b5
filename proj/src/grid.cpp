#include "advreg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advreg/errors.hpp"

namespace advreg {

namespace {

// Exact at both endpoints. Interior points use lo + i * step, which is exact
// whenever the true step (hi - lo)/(n - 1) is representable, e.g. any
// power-of-two spacing; the t-parameter form lo + (hi-lo)*(i/(n-1)) is not,
// since i/(n-1) rounds.
double linspace_at(double lo, double hi, int n, int i) {
  if (n == 1) return lo;
  if (i == 0) return lo;
  if (i == n - 1) return hi;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  return lo + step * static_cast<double>(i);
}

}  // namespace

GridDomain GridDomain::regular(std::vector<int> pts_per_axis, Vec lo, Vec hi) {
  const int d = static_cast<int>(pts_per_axis.size());
  if (d == 0 || lo.size() != pts_per_axis.size() || hi.size() != pts_per_axis.size())
    throw DimensionMismatch("grid: axis counts disagree");
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) {
    if (pts_per_axis[k] < 1) throw std::invalid_argument("grid: need >=1 point per axis");
    if (!(lo[k] <= hi[k])) throw std::invalid_argument("grid: lo > hi");
    total *= static_cast<std::size_t>(pts_per_axis[k]);
  }
  if (total > 50'000'000) throw std::invalid_argument("grid: lattice too large");

  GridDomain g;
  g.dim_ = d;
  g.lo_ = std::move(lo);
  g.hi_ = std::move(hi);
  g.shape_ = std::move(pts_per_axis);
  g.spacing_.resize(d);
  for (int k = 0; k < d; ++k)
    g.spacing_[k] = g.shape_[k] > 1 ? (g.hi_[k] - g.lo_[k]) / (g.shape_[k] - 1) : 0.0;

  g.points_.reserve(total);
  std::vector<int> idx(d, 0);
  Vec pt(d);
  for (std::size_t c = 0; c < total; ++c) {
    for (int k = 0; k < d; ++k) pt[k] = linspace_at(g.lo_[k], g.hi_[k], g.shape_[k], idx[k]);
    g.points_.push_back(pt);
    for (int k = d - 1; k >= 0; --k) {  // row-major: last axis fastest
      if (++idx[k] < g.shape_[k]) break;
      idx[k] = 0;
    }
  }
  g.regular_ = true;
  return g;
}

GridDomain GridDomain::unit_cube(int dim, int pts_per_axis) {
  return regular(std::vector<int>(dim, pts_per_axis), Vec(dim, 0.0), Vec(dim, 1.0));
}

GridDomain GridDomain::from_points(std::vector<Vec> pts, Vec spacing_hint) {
  if (pts.empty()) throw std::invalid_argument("grid: empty point list");
  const std::size_t d = pts[0].size();
  for (const auto& p : pts)
    if (p.size() != d) throw DimensionMismatch("grid: ragged point list");

  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  GridDomain g;
  g.dim_ = static_cast<int>(d);
  g.lo_.assign(d, 0.0);
  g.hi_.assign(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    double lo = pts[0][k], hi = pts[0][k];
    for (const auto& p : pts) {
      lo = std::min(lo, p[k]);
      hi = std::max(hi, p[k]);
    }
    g.lo_[k] = lo;
    g.hi_[k] = hi;
  }
  g.spacing_ = spacing_hint.size() == d ? std::move(spacing_hint) : Vec(d, 0.0);
  g.points_ = std::move(pts);
  g.regular_ = false;
  return g;
}

double GridDomain::max_spacing() const {
  double m = 0.0;
  for (double s : spacing_) m = std::max(m, s);
  return m;
}

std::size_t GridDomain::nearest(const Vec& y) const {
  if (y.size() != static_cast<std::size_t>(dim_))
    throw DimensionMismatch("grid: query dimension mismatch");
  if (regular_) {
    std::size_t flat = 0;
    for (int k = 0; k < dim_; ++k) {
      long i = 0;
      if (shape_[k] > 1) {
        i = std::lround((y[k] - lo_[k]) / spacing_[k]);
        i = std::clamp<long>(i, 0, shape_[k] - 1);
      }
      flat = flat * static_cast<std::size_t>(shape_[k]) + static_cast<std::size_t>(i);
    }
    return flat;
  }
  std::size_t best = 0;
  double best_d2 = -1.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    double d2 = 0.0;
    for (int k = 0; k < dim_; ++k) {
      const double t = points_[i][k] - y[k];
      d2 += t * t;
    }
    if (best_d2 < 0.0 || d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

bool GridDomain::in_bounds(const Vec& y, double tol) const {
  if (y.size() != static_cast<std::size_t>(dim_))
    throw DimensionMismatch("grid: query dimension mismatch");
  for (int k = 0; k < dim_; ++k)
    if (y[k] < lo_[k] - tol || y[k] > hi_[k] + tol) return false;
  return true;
}

int GridDomain::default_resolution(int dim) {
  switch (dim) {
    case 1: return 1025;
    case 2: return 65;
    case 3: return 17;
    default: return 9;
  }
}

}  // namespace advreg
