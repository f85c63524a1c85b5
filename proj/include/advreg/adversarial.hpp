#pragma once

#include <memory>
#include <string>
#include <vector>

#include "advreg/estimators.hpp"
#include "advreg/functions.hpp"
#include "advreg/grid.hpp"
#include "advreg/perturbation.hpp"

namespace advreg {

// Result of a sup-norm loss evaluation on a lattice. value is always
// recomputable as |f(argmax_x) - fhat(argmax_x + argmax_delta)| against the
// predictor the loss was evaluated for (for ideal_loss, the midpoint
// predictor of the same f). grid_spacing is the max per-axis spacing of the
// base lattice; lattice suprema under-estimate continuous ones by at most the
// local Lipschitz constant times this.
struct LossReport {
  double value = 0.0;
  Vec argmax_x;
  Vec argmax_delta;
  double grid_spacing = 0.0;
};

// max over lattice x and sampled delta of |f(x) - p(x + delta)|, outer loop
// over x in row-major order, inner over the sorted sample; first maximizer
// wins ties.
LossReport adversarial_loss(const RegressionFunction& f, const FittedPredictor& p,
                            const GridDomain& domain, const PerturbationSet& set,
                            const PerturbationSample& samp);

// Same quantity evaluated inside-out: max over inflated points x' of
// max over the preimage window {x : x + delta = x'} of |f(x) - p(x')|.
// Agrees with adversarial_loss exactly when lattice and sample are
// commensurate (sample steps integer multiples of the spacing).
LossReport adversarial_loss_swapped(const RegressionFunction& f, const FittedPredictor& p,
                                    const GridDomain& domain, const PerturbationSet& set,
                                    const PerturbationSample& samp);

// max over lattice x of |f(x) - p(x)|; delegates to adversarial_loss with the
// zero singleton so the two agree bitwise.
LossReport standard_loss(const RegressionFunction& f, const FittedPredictor& p,
                         const GridDomain& domain);

// Best achievable adversarial loss for f: half the worst oscillation of f
// over any preimage window, i.e. max over x' of max(|max f - m|, |m - min f|)
// with m the window midpoint. Using the same m as ideal_predictor makes
// adversarial_loss(f, ideal_predictor(f)) reproduce this value bitwise.
LossReport ideal_loss(const RegressionFunction& f, const GridDomain& domain,
                      const PerturbationSet& set, const PerturbationSample& samp);

// Minimax-optimal predictor against the sampled perturbations: tabulates the
// window midpoint (max f + min f) / 2 on the inflated lattice.
FittedPredictor ideal_predictor(const RegressionFunction& f, const PerturbationSet& set,
                                const PerturbationSample& samp, const GridDomain& domain);

// Robustifies a fitted predictor by the same midpoint transform applied to
// its values on the base lattice.
FittedPredictor plug_in(const FittedPredictor& base, const PerturbationSet& set,
                        const PerturbationSample& samp, const GridDomain& domain);

namespace detail {

// Precomputed inflated lattice plus per-point preimage windows in CSR layout.
// Building this once and reusing it across replicates dominates the cost of
// the Monte Carlo experiments; all plan-based evaluations below are pure.
struct InflationPlan {
  std::shared_ptr<const GridDomain> domain;    // base lattice
  std::shared_ptr<const GridDomain> inflated;  // sums x + delta, deduplicated
  PerturbationSample samp;
  std::vector<std::uint32_t> window_offsets;   // size inflated->size() + 1
  std::vector<NeighborEntry> window_entries;
  std::string set_description;
  bool contains_zero = true;
};

InflationPlan build_plan(const GridDomain& domain, const PerturbationSet& set,
                         const PerturbationSample& samp);

// f or p evaluated at every lattice point, in lattice order.
std::vector<double> lattice_values(const RegressionFunction& f, const GridDomain& domain);
std::vector<double> lattice_values(const FittedPredictor& p, const GridDomain& domain);

// Window midpoints of precomputed base-lattice values, one per inflated point.
std::vector<double> midpoint_table(const std::vector<double>& base_values,
                                   const InflationPlan& plan);

// Losses against a table of predictor values on the inflated lattice.
LossReport loss_against_table(const std::vector<double>& f_values,
                              const std::vector<double>& table, const InflationPlan& plan);
LossReport ideal_loss_from_values(const std::vector<double>& f_values,
                                  const InflationPlan& plan);

}  // namespace detail

}  // namespace advreg
