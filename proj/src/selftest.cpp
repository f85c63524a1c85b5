#include "advreg/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "advreg/experiments.hpp"

namespace advreg::selftest {

namespace {

int rand_int(Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

Vec canon_add(const Vec& x, const Vec& d) {
  Vec z(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) z[k] = canon_zero(x[k] + d[k]);
  return z;
}

}  // namespace

RegressionFunction random_piecewise_linear(Rng& rng, int dim) {
  struct Hinge {
    double w, sign, knot;
    int axis;
  };
  const int count = rand_int(rng, 1, 3);
  std::vector<Hinge> hinges(count);
  double slope_sum = 0.0;
  for (auto& h : hinges) {
    h.w = 4.0 * rng.uniform() - 2.0;
    h.sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    h.knot = rng.uniform();
    h.axis = rand_int(rng, 0, dim - 1);
    slope_sum += std::fabs(h.w);
  }
  const double level = 2.0 * rng.uniform() - 1.0;
  return RegressionFunction{
      [hinges, level](const Vec& x) {
        double v = level;
        for (const auto& h : hinges) v += h.w * std::max(0.0, h.sign * (x[h.axis] - h.knot));
        return v;
      },
      SmoothnessSpec::isotropic(1.0, slope_sum + 0.1, dim), "piecewise_linear"};
}

PerturbationSet random_set(Rng& rng, int dim, double spacing) {
  const int max_steps = std::min(64, static_cast<int>(0.25 / spacing));
  auto dyadic = [&](int lo, int hi) { return rand_int(rng, lo, hi) * spacing; };
  switch (rand_int(rng, 0, 5)) {
    case 0: {
      const double ps[] = {0.5, 1.0, 2.0, std::numeric_limits<double>::infinity()};
      return PerturbationSet::lp_ball(ps[rand_int(rng, 0, 3)], dyadic(1, max_steps), dim);
    }
    case 1: {
      const double ps[] = {1.0, 2.0, std::numeric_limits<double>::infinity()};
      return PerturbationSet::sparse_lp_ball(ps[rand_int(rng, 0, 2)], dyadic(1, max_steps),
                                             rand_int(rng, 1, dim), dim);
    }
    case 2: {
      Vec hw(dim);
      for (double& a : hw) a = dyadic(0, max_steps);
      return PerturbationSet::box(std::move(hw));
    }
    case 3: {
      Vec a(dim), b(dim);
      for (int k = 0; k < dim; ++k) {
        a[k] = dyadic(-max_steps, max_steps);
        b[k] = dyadic(-max_steps, max_steps);
      }
      if (a == b) b[0] = canon_zero(b[0] + spacing);
      return PerturbationSet::segment(std::move(a), std::move(b));
    }
    case 4: {
      std::vector<Vec> pts{Vec(dim, 0.0)};
      const int extra = rand_int(rng, 1, 4);
      for (int i = 0; i < extra; ++i) {
        Vec p(dim);
        for (double& c : p) c = dyadic(-max_steps, max_steps);
        pts.push_back(std::move(p));
      }
      return PerturbationSet::finite_points(std::move(pts));
    }
    default:
      return PerturbationSet::singleton(dim);
  }
}

Instance random_instance(Rng& rng, int dim) {
  const int log2pts = dim == 1 ? rand_int(rng, 5, 7) : rand_int(rng, 3, 4);
  const int pts = (1 << log2pts) + 1;
  Instance inst{GridDomain::unit_cube(dim, pts), PerturbationSet::singleton(dim),
                PerturbationSample{}, RegressionFunction{}};
  inst.set = random_set(rng, dim, inst.domain.spacing()[0]);
  inst.samp = sample(inst.set, aligned_sample_resolution(inst.set, inst.domain, 0));
  inst.f = random_piecewise_linear(rng, dim);
  return inst;
}

FittedPredictor random_table(Rng& rng, std::shared_ptr<const GridDomain> grid) {
  std::vector<double> values(grid->size());
  for (double& v : values) v = 2.0 * rng.uniform() - 1.0;
  MethodInfo info;
  info.kind = MethodKind::Midpoint;
  info.label = "random_table";
  return FittedPredictor::tabulated(std::move(grid), std::move(values), std::move(info), 0);
}

namespace {

SuiteResult order_exchange_suite(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < 60; ++i) {
    const int dim = i % 3 == 2 ? 2 : 1;
    const Instance inst = random_instance(rng, dim);
    auto inflated = std::make_shared<const GridDomain>(
        perturbed_domain(inst.domain, inst.set, inst.samp));
    const FittedPredictor p = random_table(rng, inflated);
    const LossReport a = adversarial_loss(inst.f, p, inst.domain, inst.set, inst.samp);
    const LossReport b = adversarial_loss_swapped(inst.f, p, inst.domain, inst.set, inst.samp);
    worst = std::max(worst, std::fabs(a.value - b.value));
    const double recomputed = std::fabs(inst.f(a.argmax_x) - p(canon_add(a.argmax_x, a.argmax_delta)));
    worst = std::max(worst, std::fabs(recomputed - a.value));
  }
  std::ostringstream detail;
  detail << "max_gap=" << worst;
  return SuiteResult{"order_exchange", worst <= 1e-12, detail.str()};
}

SuiteResult midpoint_optimality_suite(std::uint64_t seed) {
  Rng rng(seed);
  double worst_eq = 0.0, worst_opt = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int dim = i % 4 == 3 ? 2 : 1;
    const Instance inst = random_instance(rng, dim);
    const FittedPredictor fstar = ideal_predictor(inst.f, inst.set, inst.samp, inst.domain);
    const double achieved =
        adversarial_loss(inst.f, fstar, inst.domain, inst.set, inst.samp).value;
    const double best = ideal_loss(inst.f, inst.domain, inst.set, inst.samp).value;
    worst_eq = std::max(worst_eq, std::fabs(achieved - best));
    auto inflated = std::make_shared<const GridDomain>(
        perturbed_domain(inst.domain, inst.set, inst.samp));
    for (int c = 0; c < 5; ++c) {
      const FittedPredictor g = random_table(rng, inflated);
      const double other = adversarial_loss(inst.f, g, inst.domain, inst.set, inst.samp).value;
      worst_opt = std::max(worst_opt, best - other);
    }
  }
  std::ostringstream detail;
  detail << "max_eq_gap=" << worst_eq << " max_excess=" << std::max(worst_opt, 0.0);
  return SuiteResult{"midpoint_optimality", worst_eq <= 1e-12 && worst_opt <= 1e-12,
                     detail.str()};
}

SuiteResult risk_sandwich_suite(std::uint64_t seed) {
  int checks = 0, violations = 0;
  const GridDomain domain = GridDomain::unit_cube(1, 1025);
  for (const double q : {0.0, 0.0625}) {
    const PerturbationSet set = PerturbationSet::lp_ball(
        std::numeric_limits<double>::infinity(), q, 1);
    const PerturbationSample samp = sample(set, aligned_sample_resolution(set, domain, 0));
    for (const bool rough : {false, true}) {
      const RegressionFunction f =
          rough ? witness_iso_rough(0.5, 1) : witness_iso_smooth(1.0, 1.0, 1);
      const double ideal = ideal_loss(f, domain, set, samp).value;
      for (int rep = 0; rep < 3; ++rep) {
        const Dataset data = generate(f, 256, 0.2, seed + static_cast<std::uint64_t>(rep));
        const FittedPredictor base =
            fit_local_poly(data, f.spec, bandwidth_iso(256, f.spec.beta(), 1));
        const FittedPredictor robust = plug_in(base, set, samp, domain);
        const double adv = adversarial_loss(f, robust, domain, set, samp).value;
        const double std_robust = standard_loss(f, robust, domain).value;
        const double std_base = standard_loss(f, base, domain).value;
        ++checks;
        if (!(std::max(std_robust, ideal) <= adv && adv <= std_base + 3.0 * ideal))
          ++violations;
      }
    }
  }
  std::ostringstream detail;
  detail << "checks=" << checks << " violations=" << violations;
  return SuiteResult{"risk_sandwich", violations == 0, detail.str()};
}

SuiteResult determinism_suite(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.f = witness_iso_rough(0.5, 1);
  cfg.perturbation = PerturbationSet::lp_ball(std::numeric_limits<double>::infinity(), 0.0625, 1);
  cfg.method = MethodKind::LocalPoly;
  cfg.n_grid = {128};
  cfg.replicates = 6;
  cfg.noise_sd = 0.2;
  cfg.master_seed = seed;
  cfg.lattice_resolution = 257;

  cfg.jobs = 1;
  const RiskEstimate first = estimate_risk(cfg, 128);
  const RiskEstimate second = estimate_risk(cfg, 128);
  cfg.jobs = 3;
  const RiskEstimate parallel = estimate_risk(cfg, 128);

  const bool same = first.losses == second.losses && first.losses == parallel.losses &&
                    first.standard_losses == parallel.standard_losses &&
                    first.mean == parallel.mean;
  return SuiteResult{"determinism", same,
                     same ? "replicates identical across runs and worker counts"
                          : "outputs changed between runs"};
}

}  // namespace

std::vector<SuiteResult> run_suites(std::uint64_t seed) {
  return {order_exchange_suite(seed), midpoint_optimality_suite(seed + 1),
          risk_sandwich_suite(seed + 2), determinism_suite(seed + 3)};
}

bool run_and_report(std::ostream& out, std::uint64_t seed) {
  bool all_ok = true;
  for (const SuiteResult& r : run_suites(seed)) {
    out << "suite=" << r.name << " status=" << (r.ok ? "ok" : "fail") << " " << r.detail
        << "\n";
    all_ok = all_ok && r.ok;
  }
  return all_ok;
}

}  // namespace advreg::selftest
