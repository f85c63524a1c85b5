#include "advreg/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advreg/errors.hpp"

namespace advreg {

namespace {

constexpr double kAbsTol = 1e-12;

double norm2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// lo + i * step form: exact whenever the true step is representable (any
// dyadic spacing), unlike the t-parameter form whose i/(n-1) rounds.
double linspace_at(double lo, double hi, int n, int i) {
  if (n == 1) return lo;
  if (i == 0) return lo;
  if (i == n - 1) return hi;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  return canon_zero(lo + step * static_cast<double>(i));
}

// Snap tolerance: generous against float noise, tiny against the lattice step.
double snap_tol(const GridDomain& domain) {
  double t = 1e-9;
  for (double s : domain.spacing())
    if (s > 0.0) t = std::min(t, 0.25 * s);
  return t;
}

}  // namespace

PerturbationSet PerturbationSet::lp_ball(double p, double q, int dim) {
  if (dim < 1) throw std::invalid_argument("lp_ball: dim must be >= 1");
  if (!(p > 0.0)) throw std::invalid_argument("lp_ball: p must be positive");
  if (q < 0.0) throw std::invalid_argument("lp_ball: radius must be >= 0");
  PerturbationSet s;
  s.kind_ = PerturbKind::LpBall;
  s.dim_ = dim;
  s.p_ = p;
  s.q_ = q;
  return s;
}

PerturbationSet PerturbationSet::sparse_lp_ball(double p, double q, int max_nonzero, int dim) {
  PerturbationSet s = lp_ball(p, q, dim);
  if (max_nonzero < 0 || max_nonzero > dim)
    throw std::invalid_argument("sparse_lp_ball: need 0 <= s <= dim");
  s.kind_ = PerturbKind::SparseLpBall;
  s.sparsity_ = max_nonzero;
  return s;
}

PerturbationSet PerturbationSet::box(Vec half_widths) {
  if (half_widths.empty()) throw std::invalid_argument("box: dim must be >= 1");
  for (double a : half_widths)
    if (a < 0.0) throw std::invalid_argument("box: half-widths must be >= 0");
  PerturbationSet s;
  s.kind_ = PerturbKind::Box;
  s.dim_ = static_cast<int>(half_widths.size());
  s.a_ = std::move(half_widths);
  return s;
}

PerturbationSet PerturbationSet::segment(Vec a, Vec b) {
  if (a.empty() || a.size() != b.size())
    throw DimensionMismatch("segment: endpoint dimensions disagree");
  PerturbationSet s;
  s.kind_ = PerturbKind::Segment;
  s.dim_ = static_cast<int>(a.size());
  s.seg_a_ = std::move(a);
  s.seg_b_ = std::move(b);
  s.contains_zero_ = s.contains(Vec(s.dim_, 0.0));
  return s;
}

PerturbationSet PerturbationSet::finite_points(std::vector<Vec> pts) {
  if (pts.empty()) throw std::invalid_argument("finite_points: empty list");
  const std::size_t d = pts[0].size();
  for (const auto& p : pts)
    if (p.size() != d) throw DimensionMismatch("finite_points: ragged point list");
  PerturbationSet s;
  s.kind_ = PerturbKind::FinitePoints;
  s.dim_ = static_cast<int>(d);
  for (auto& p : pts)
    for (auto& v : p) v = canon_zero(v);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  s.points_ = std::move(pts);
  if (!s.contains(Vec(s.dim_, 0.0)))
    throw std::invalid_argument("finite_points: the list must contain 0");
  return s;
}

PerturbationSet PerturbationSet::singleton(int dim) {
  if (dim < 1) throw std::invalid_argument("singleton: dim must be >= 1");
  PerturbationSet s;
  s.kind_ = PerturbKind::Singleton;
  s.dim_ = dim;
  return s;
}

std::string PerturbationSet::describe() const {
  switch (kind_) {
    case PerturbKind::LpBall:
      return "lp_ball(p=" + std::to_string(p_) + ",q=" + std::to_string(q_) + ")";
    case PerturbKind::SparseLpBall:
      return "sparse_lp_ball(p=" + std::to_string(p_) + ",q=" + std::to_string(q_) +
             ",s=" + std::to_string(sparsity_) + ")";
    case PerturbKind::Box: return "box";
    case PerturbKind::Segment: return "segment";
    case PerturbKind::FinitePoints: return "finite_points";
    case PerturbKind::Singleton: return "singleton";
  }
  return "?";
}

bool PerturbationSet::contains(const Vec& delta) const {
  if (delta.size() != static_cast<std::size_t>(dim_))
    throw DimensionMismatch("contains: delta has wrong dimension");
  switch (kind_) {
    case PerturbKind::Singleton: {
      for (double v : delta)
        if (std::fabs(v) > kAbsTol) return false;
      return true;
    }
    case PerturbKind::SparseLpBall: {
      int nz = 0;
      for (double v : delta)
        if (v != 0.0) ++nz;
      if (nz > sparsity_) return false;
      [[fallthrough]];
    }
    case PerturbKind::LpBall: {
      const double tol = kAbsTol * std::max(1.0, q_);
      if (std::isinf(p_)) {
        double m = 0.0;
        for (double v : delta) m = std::max(m, std::fabs(v));
        return m <= q_ + tol;
      }
      if (p_ >= 1.0) {
        double s = 0.0;
        for (double v : delta) s += std::pow(std::fabs(v), p_);
        return std::pow(s, 1.0 / p_) <= q_ + tol;
      }
      double s = 0.0;  // quasi-norm for 0 < p < 1
      for (double v : delta) s += std::pow(std::fabs(v), p_);
      return s <= std::pow(q_, p_) + kAbsTol * std::max(1.0, std::pow(q_, p_));
    }
    case PerturbKind::Box: {
      for (int k = 0; k < dim_; ++k)
        if (std::fabs(delta[k]) > a_[k] + kAbsTol * std::max(1.0, a_[k])) return false;
      return true;
    }
    case PerturbKind::Segment: {
      Vec dir(dim_);
      double len2 = 0.0;
      for (int k = 0; k < dim_; ++k) {
        dir[k] = seg_b_[k] - seg_a_[k];
        len2 += dir[k] * dir[k];
      }
      double t = 0.0;
      if (len2 > 0.0) {
        for (int k = 0; k < dim_; ++k) t += (delta[k] - seg_a_[k]) * dir[k];
        t = std::clamp(t / len2, 0.0, 1.0);
      }
      double d2 = 0.0;
      for (int k = 0; k < dim_; ++k) {
        const double r = delta[k] - (seg_a_[k] + t * dir[k]);
        d2 += r * r;
      }
      const double scale = std::max(1.0, std::sqrt(len2));
      return std::sqrt(d2) <= kAbsTol * scale;
    }
    case PerturbKind::FinitePoints: {
      for (const auto& p : points_) {
        bool hit = true;
        for (int k = 0; k < dim_; ++k)
          if (std::fabs(delta[k] - p[k]) > kAbsTol) {
            hit = false;
            break;
          }
        if (hit) return true;
      }
      return false;
    }
  }
  return false;
}

bool contains(const PerturbationSet& set, const Vec& delta) { return set.contains(delta); }

PerturbationSample sample(const PerturbationSet& set, int resolution) {
  if (resolution < 1) throw std::invalid_argument("sample: resolution must be >= 1");
  const int d = set.dim();
  std::vector<Vec> pts;

  switch (set.kind()) {
    case PerturbKind::Singleton: {
      pts.emplace_back(d, 0.0);
      break;
    }
    case PerturbKind::FinitePoints: {
      pts = set.points();
      break;
    }
    case PerturbKind::Segment: {
      for (int i = 0; i < resolution; ++i) {
        Vec p(d);
        for (int k = 0; k < d; ++k)
          p[k] = canon_zero(linspace_at(set.seg_from()[k], set.seg_to()[k], resolution, i));
        pts.push_back(std::move(p));
      }
      if (set.contains_zero()) pts.emplace_back(d, 0.0);
      break;
    }
    case PerturbKind::LpBall:
    case PerturbKind::SparseLpBall:
    case PerturbKind::Box: {
      Vec ext(d, set.radius());
      if (set.kind() == PerturbKind::Box) ext = set.half_widths();
      std::vector<int> shape(d);
      double total = 1.0;
      for (int k = 0; k < d; ++k) {
        shape[k] = ext[k] > 0.0 ? resolution : 1;
        total *= shape[k];
      }
      if (total > 2e6) throw std::invalid_argument("sample: resolution^dim too large");
      std::vector<int> idx(d, 0);
      const auto n = static_cast<std::size_t>(total);
      for (std::size_t c = 0; c < n; ++c) {
        Vec p(d);
        for (int k = 0; k < d; ++k) p[k] = linspace_at(-ext[k], ext[k], shape[k], idx[k]);
        if (set.contains(p)) pts.push_back(std::move(p));
        for (int k = d - 1; k >= 0; --k) {
          if (++idx[k] < shape[k]) break;
          idx[k] = 0;
        }
      }
      // Force-include the center and the per-axis extremes.
      pts.emplace_back(d, 0.0);
      for (int k = 0; k < d; ++k) {
        if (ext[k] <= 0.0) continue;
        Vec lo(d, 0.0), hi(d, 0.0);
        lo[k] = -ext[k];
        hi[k] = ext[k];
        if (set.contains(lo)) pts.push_back(std::move(lo));
        if (set.contains(hi)) pts.push_back(std::move(hi));
      }
      break;
    }
  }

  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return PerturbationSample{std::move(pts), resolution};
}

double diameter(const PerturbationSet& set, const PerturbationSample& samp) {
  switch (set.kind()) {
    case PerturbKind::Singleton: return 0.0;
    case PerturbKind::Box: return 2.0 * norm2(set.half_widths());
    case PerturbKind::Segment: {
      Vec diff(set.dim());
      for (int k = 0; k < set.dim(); ++k) diff[k] = set.seg_to()[k] - set.seg_from()[k];
      return norm2(diff);
    }
    case PerturbKind::LpBall: {
      const double q = set.radius(), p = set.p();
      if (std::isinf(p)) return 2.0 * q * std::sqrt(static_cast<double>(set.dim()));
      if (p == 1.0 || p == 2.0) return 2.0 * q;
      break;  // no closed form used; fall through to brute force
    }
    default: break;
  }
  double best = 0.0;
  for (std::size_t i = 0; i < samp.points.size(); ++i)
    for (std::size_t j = i + 1; j < samp.points.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < samp.points[i].size(); ++k) {
        const double t = samp.points[i][k] - samp.points[j][k];
        d2 += t * t;
      }
      best = std::max(best, d2);
    }
  return std::sqrt(best);
}

Vec coord_ranges(const PerturbationSet& set, const PerturbationSample& samp) {
  (void)samp;  // every kind has a closed form
  const int d = set.dim();
  switch (set.kind()) {
    case PerturbKind::Singleton: return Vec(d, 0.0);
    case PerturbKind::Box: {
      Vec r(d);
      for (int k = 0; k < d; ++k) r[k] = 2.0 * set.half_widths()[k];
      return r;
    }
    case PerturbKind::Segment: {
      Vec r(d);
      for (int k = 0; k < d; ++k) r[k] = std::fabs(set.seg_to()[k] - set.seg_from()[k]);
      return r;
    }
    case PerturbKind::LpBall: return Vec(d, 2.0 * set.radius());
    case PerturbKind::SparseLpBall:
      return Vec(d, set.max_nonzero() >= 1 ? 2.0 * set.radius() : 0.0);
    case PerturbKind::FinitePoints: {
      Vec r(d, 0.0);
      for (int k = 0; k < d; ++k) {
        double lo = set.points()[0][k], hi = lo;
        for (const auto& p : set.points()) {
          lo = std::min(lo, p[k]);
          hi = std::max(hi, p[k]);
        }
        r[k] = hi - lo;
      }
      return r;
    }
  }
  return Vec(d, 0.0);
}

std::vector<NeighborEntry> neighborhood_indices(const Vec& xprime, const GridDomain& domain,
                                                const PerturbationSample& samp) {
  const int d = domain.dim();
  if (xprime.size() != static_cast<std::size_t>(d))
    throw DimensionMismatch("neighborhood: point dimension mismatch");
  const double tol = snap_tol(domain);

  std::vector<NeighborEntry> out;
  Vec y(d);
  for (std::size_t j = 0; j < samp.points.size(); ++j) {
    const Vec& delta = samp.points[j];
    for (int k = 0; k < d; ++k) y[k] = xprime[k] - delta[k];
    if (!domain.in_bounds(y, tol)) continue;
    const std::size_t i = domain.nearest(y);
    const Vec& x = domain.point(i);
    bool ok = true;
    for (int k = 0; k < d; ++k)
      if (std::fabs(y[k] - x[k]) > tol) {
        ok = false;
        break;
      }
    if (ok) out.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  }
  std::sort(out.begin(), out.end(), [](const NeighborEntry& a, const NeighborEntry& b) {
    return a.lattice != b.lattice ? a.lattice < b.lattice : a.sample < b.sample;
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const NeighborEntry& a, const NeighborEntry& b) {
                          return a.lattice == b.lattice;
                        }),
            out.end());
  return out;
}

std::vector<Vec> neighborhood(const Vec& xprime, const PerturbationSet& set,
                              const GridDomain& domain, const PerturbationSample& samp) {
  if (set.dim() != domain.dim())
    throw DimensionMismatch("neighborhood: set/domain dimension mismatch");
  auto entries = neighborhood_indices(xprime, domain, samp);
  if (entries.empty())
    throw EmptyNeighborhood("neighborhood: no lattice preimage (sample finer than samp?)");
  std::vector<Vec> pts;
  pts.reserve(entries.size());
  for (const auto& e : entries) pts.push_back(domain.point(e.lattice));
  return pts;
}

GridDomain perturbed_domain(const GridDomain& domain, const PerturbationSet& set,
                            const PerturbationSample& samp) {
  if (set.dim() != domain.dim())
    throw DimensionMismatch("perturbed_domain: set/domain dimension mismatch");
  const int d = domain.dim();
  std::vector<Vec> pts;
  pts.reserve(domain.size() * samp.points.size());
  Vec s(d);
  for (const auto& x : domain.points())
    for (const auto& delta : samp.points) {
      for (int k = 0; k < d; ++k) s[k] = canon_zero(x[k] + delta[k]);
      pts.push_back(s);
    }
  return GridDomain::from_points(std::move(pts), domain.spacing());
}

}  // namespace advreg
