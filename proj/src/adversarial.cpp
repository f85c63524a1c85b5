#include "advreg/adversarial.hpp"

#include <cmath>
#include <stdexcept>

#include "advreg/errors.hpp"

namespace advreg {

namespace detail {

InflationPlan build_plan(const GridDomain& domain, const PerturbationSet& set,
                         const PerturbationSample& samp) {
  if (set.dim() != domain.dim())
    throw DimensionMismatch("inflation: perturbation/domain dimension mismatch");
  InflationPlan plan;
  plan.domain = std::make_shared<GridDomain>(domain);
  plan.inflated = std::make_shared<GridDomain>(perturbed_domain(domain, set, samp));
  plan.samp = samp;
  plan.set_description = set.describe();
  plan.contains_zero = set.contains_zero();
  const std::size_t m = plan.inflated->size();
  plan.window_offsets.resize(m + 1, 0);
  plan.window_entries.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    auto entries = neighborhood_indices(plan.inflated->point(j), domain, samp);
    if (entries.empty())
      throw EmptyNeighborhood("inflation: inflated point has no lattice preimage");
    plan.window_entries.insert(plan.window_entries.end(), entries.begin(), entries.end());
    plan.window_offsets[j + 1] = static_cast<std::uint32_t>(plan.window_entries.size());
  }
  return plan;
}

std::vector<double> lattice_values(const RegressionFunction& f, const GridDomain& domain) {
  std::vector<double> v(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) v[i] = f(domain.point(i));
  return v;
}

std::vector<double> lattice_values(const FittedPredictor& p, const GridDomain& domain) {
  std::vector<double> v(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) v[i] = p(domain.point(i));
  return v;
}

std::vector<double> midpoint_table(const std::vector<double>& base_values,
                                   const InflationPlan& plan) {
  if (base_values.size() != plan.domain->size())
    throw DimensionMismatch("midpoint_table: value count does not match the base lattice");
  const std::size_t m = plan.inflated->size();
  std::vector<double> table(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto b = plan.window_offsets[j], e = plan.window_offsets[j + 1];
    if (b == e) throw EmptyNeighborhood("midpoint_table: empty window");
    double lo = base_values[plan.window_entries[b].lattice];
    double hi = lo;
    for (auto k = b + 1; k < e; ++k) {
      const double v = base_values[plan.window_entries[k].lattice];
      if (v > hi) hi = v;
      if (v < lo) lo = v;
    }
    table[j] = 0.5 * (hi + lo);
  }
  return table;
}

LossReport loss_against_table(const std::vector<double>& f_values,
                              const std::vector<double>& table, const InflationPlan& plan) {
  LossReport rep;
  rep.grid_spacing = plan.domain->max_spacing();
  std::size_t best_j = 0;
  NeighborEntry best_e{0, 0};
  bool found = false;
  for (std::size_t j = 0; j < plan.inflated->size(); ++j) {
    const double pv = table[j];
    for (auto k = plan.window_offsets[j]; k < plan.window_offsets[j + 1]; ++k) {
      const auto ent = plan.window_entries[k];
      const double cand = std::fabs(f_values[ent.lattice] - pv);
      if (!found || cand > rep.value) {
        rep.value = cand;
        best_j = j;
        best_e = ent;
        found = true;
      }
    }
  }
  if (!found) throw EmptyNeighborhood("loss: no preimage windows");
  rep.argmax_x = plan.domain->point(best_e.lattice);
  rep.argmax_delta = plan.samp.points[best_e.sample];
  (void)best_j;
  return rep;
}

LossReport ideal_loss_from_values(const std::vector<double>& f_values,
                                  const InflationPlan& plan) {
  LossReport rep;
  rep.grid_spacing = plan.domain->max_spacing();
  NeighborEntry best_e{0, 0};
  bool found = false;
  for (std::size_t j = 0; j < plan.inflated->size(); ++j) {
    const auto b = plan.window_offsets[j], e = plan.window_offsets[j + 1];
    if (b == e) throw EmptyNeighborhood("ideal loss: empty window");
    NeighborEntry lo_e = plan.window_entries[b], hi_e = lo_e;
    double lo = f_values[lo_e.lattice], hi = lo;
    for (auto k = b + 1; k < e; ++k) {
      const auto ent = plan.window_entries[k];
      const double v = f_values[ent.lattice];
      if (v > hi) {
        hi = v;
        hi_e = ent;
      }
      if (v < lo) {
        lo = v;
        lo_e = ent;
      }
    }
    const double m = 0.5 * (hi + lo);
    const double up = std::fabs(hi - m), down = std::fabs(m - lo);
    const double term = up >= down ? up : down;
    if (!found || term > rep.value) {
      rep.value = term;
      best_e = up >= down ? hi_e : lo_e;
      found = true;
    }
  }
  if (!found) throw EmptyNeighborhood("ideal loss: no preimage windows");
  rep.argmax_x = plan.domain->point(best_e.lattice);
  rep.argmax_delta = plan.samp.points[best_e.sample];
  return rep;
}

}  // namespace detail

LossReport adversarial_loss(const RegressionFunction& f, const FittedPredictor& p,
                            const GridDomain& domain, const PerturbationSet& set,
                            const PerturbationSample& samp) {
  if (set.dim() != domain.dim())
    throw DimensionMismatch("adversarial_loss: perturbation/domain dimension mismatch");
  if (samp.points.empty()) throw std::invalid_argument("adversarial_loss: empty sample");
  const int d = domain.dim();
  LossReport rep;
  rep.grid_spacing = domain.max_spacing();
  bool found = false;
  Vec z(d);
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const Vec& x = domain.point(i);
    const double fx = f(x);
    for (const Vec& delta : samp.points) {
      for (int k = 0; k < d; ++k) z[k] = canon_zero(x[k] + delta[k]);
      const double cand = std::fabs(fx - p(z));
      if (!found || cand > rep.value) {
        rep.value = cand;
        rep.argmax_x = x;
        rep.argmax_delta = delta;
        found = true;
      }
    }
  }
  return rep;
}

LossReport adversarial_loss_swapped(const RegressionFunction& f, const FittedPredictor& p,
                                    const GridDomain& domain, const PerturbationSet& set,
                                    const PerturbationSample& samp) {
  const auto plan = detail::build_plan(domain, set, samp);
  const auto fv = detail::lattice_values(f, domain);
  LossReport rep;
  rep.grid_spacing = domain.max_spacing();
  bool found = false;
  for (std::size_t j = 0; j < plan.inflated->size(); ++j) {
    const double pv = p(plan.inflated->point(j));
    for (auto k = plan.window_offsets[j]; k < plan.window_offsets[j + 1]; ++k) {
      const auto ent = plan.window_entries[k];
      const double cand = std::fabs(fv[ent.lattice] - pv);
      if (!found || cand > rep.value) {
        rep.value = cand;
        rep.argmax_x = domain.point(ent.lattice);
        rep.argmax_delta = samp.points[ent.sample];
        found = true;
      }
    }
  }
  if (!found) throw EmptyNeighborhood("adversarial_loss_swapped: no preimage windows");
  return rep;
}

LossReport standard_loss(const RegressionFunction& f, const FittedPredictor& p,
                         const GridDomain& domain) {
  const auto zero = PerturbationSet::singleton(domain.dim());
  return adversarial_loss(f, p, domain, zero, sample(zero, 1));
}

LossReport ideal_loss(const RegressionFunction& f, const GridDomain& domain,
                      const PerturbationSet& set, const PerturbationSample& samp) {
  const auto plan = detail::build_plan(domain, set, samp);
  return detail::ideal_loss_from_values(detail::lattice_values(f, domain), plan);
}

namespace {

FittedPredictor make_midpoint(const std::vector<double>& base_values,
                              const detail::InflationPlan& plan, MethodInfo info,
                              std::size_t training_n) {
  info.robustified = true;
  info.perturbation = plan.set_description;
  return FittedPredictor::tabulated(plan.inflated, detail::midpoint_table(base_values, plan),
                                    std::move(info), training_n);
}

}  // namespace

FittedPredictor ideal_predictor(const RegressionFunction& f, const PerturbationSet& set,
                                const PerturbationSample& samp, const GridDomain& domain) {
  const auto plan = detail::build_plan(domain, set, samp);
  MethodInfo info;
  info.kind = MethodKind::Midpoint;
  info.label = "midpoint:" + f.label;
  return make_midpoint(detail::lattice_values(f, domain), plan, std::move(info), 0);
}

FittedPredictor plug_in(const FittedPredictor& base, const PerturbationSet& set,
                        const PerturbationSample& samp, const GridDomain& domain) {
  const auto plan = detail::build_plan(domain, set, samp);
  MethodInfo info = base.method();
  info.kind = MethodKind::Midpoint;
  info.label = "midpoint:" + info.label;
  return make_midpoint(detail::lattice_values(base, domain), plan, std::move(info),
                       base.training_n());
}

}  // namespace advreg
