#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "advreg/grid.hpp"

namespace advreg {

enum class PerturbKind { LpBall, SparseLpBall, Box, Segment, FinitePoints, Singleton };

// A bounded perturbation set in R^d. Ball radii use the lp norm for p >= 1 and
// the quasi-norm sum |d_i|^p <= q^p for 0 < p < 1; p = infinity is the max norm.
class PerturbationSet {
 public:
  static PerturbationSet lp_ball(double p, double q, int dim);
  static PerturbationSet sparse_lp_ball(double p, double q, int max_nonzero, int dim);
  static PerturbationSet box(Vec half_widths);
  static PerturbationSet segment(Vec a, Vec b);
  static PerturbationSet finite_points(std::vector<Vec> pts);  // must include 0
  static PerturbationSet singleton(int dim);                   // {0}

  PerturbKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool contains_zero() const { return contains_zero_; }
  double p() const { return p_; }
  double radius() const { return q_; }
  int max_nonzero() const { return sparsity_; }
  const Vec& half_widths() const { return a_; }
  const Vec& seg_from() const { return seg_a_; }
  const Vec& seg_to() const { return seg_b_; }
  const std::vector<Vec>& points() const { return points_; }
  std::string describe() const;

  bool contains(const Vec& delta) const;

 private:
  PerturbKind kind_ = PerturbKind::Singleton;
  int dim_ = 0;
  bool contains_zero_ = true;
  double p_ = std::numeric_limits<double>::infinity();
  double q_ = 0.0;
  int sparsity_ = 0;
  Vec a_, seg_a_, seg_b_;
  std::vector<Vec> points_;
};

bool contains(const PerturbationSet& set, const Vec& delta);

// Finite stand-in for the set: an axis-uniform lattice over its bounding box,
// filtered by membership, with 0 (when the set has it) and the per-axis
// extreme points force-included so closed-form diameters are attained exactly.
struct PerturbationSample {
  std::vector<Vec> points;  // lexicographically sorted, deduplicated
  int resolution = 0;
};

PerturbationSample sample(const PerturbationSet& set, int resolution);

// Max pairwise Euclidean distance. Closed forms for Singleton, Box, Segment and
// LpBall with p in {1, 2, inf}; brute force over the sample otherwise.
double diameter(const PerturbationSet& set, const PerturbationSample& samp);

// Per-coordinate ranges sup |d_i - d_i'|. Closed forms where available.
Vec coord_ranges(const PerturbationSet& set, const PerturbationSample& samp);

// Preimages of xprime on the domain lattice: every lattice point x with
// x + delta == xprime for some sampled delta. Computed by snapping xprime -
// delta onto the lattice within a 1e-9 box; exact (bitwise) whenever sample
// steps are integer multiples of the lattice spacing. Throws EmptyNeighborhood
// when nothing snaps (xprime produced by a finer sample than samp).
std::vector<Vec> neighborhood(const Vec& xprime, const PerturbationSet& set,
                              const GridDomain& domain, const PerturbationSample& samp);

// Index-level form used by the loss evaluators: (lattice index, sample index)
// pairs, sorted by lattice index, one entry per lattice point (lowest sample
// index wins). Does not throw on empty.
struct NeighborEntry {
  std::uint32_t lattice;
  std::uint32_t sample;
};
std::vector<NeighborEntry> neighborhood_indices(const Vec& xprime, const GridDomain& domain,
                                                const PerturbationSample& samp);

// The inflated domain: deduplicated {x + delta : x in lattice, delta in samp}.
GridDomain perturbed_domain(const GridDomain& domain, const PerturbationSet& set,
                            const PerturbationSample& samp);

}  // namespace advreg
