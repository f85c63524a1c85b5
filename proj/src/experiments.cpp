#include "advreg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "advreg/csv.hpp"
#include "advreg/errors.hpp"

namespace advreg {

namespace {

// Runs body(0..count-1) across up to jobs threads. Slot-indexed outputs keep
// results identical for every worker count.
void parallel_for(int jobs, int count, const std::function<void(int)>& body) {
  if (count <= 0) return;
  jobs = std::clamp(jobs, 1, count);
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(jobs);
  for (int j = 0; j < jobs; ++j) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (err) std::rethrow_exception(err);
}

GridDomain make_domain(const ExperimentConfig& cfg) {
  const int d = cfg.f.spec.dim();
  const int res =
      cfg.lattice_resolution > 0 ? cfg.lattice_resolution : GridDomain::default_resolution(d);
  return GridDomain::unit_cube(d, res);
}

PerturbationSet effective_set(const ExperimentConfig& cfg, std::size_t n) {
  if (cfg.q_exponent > 0.0) {
    const double q = cfg.q_scale * std::pow(static_cast<double>(n), -cfg.q_exponent);
    return with_radius(cfg.perturbation, q);
  }
  return cfg.perturbation;
}

double radius_report(const PerturbationSet& set, const PerturbationSample& samp) {
  const Vec r = coord_ranges(set, samp);
  double m = 0.0;
  for (double v : r) m = std::max(m, v);
  return 0.5 * m;
}

FittedPredictor fit_base(const ExperimentConfig& cfg, const Dataset& data, std::size_t n) {
  switch (cfg.method) {
    case MethodKind::LocalPoly: {
      const double h = cfg.bandwidth > 0.0
                           ? cfg.bandwidth
                           : bandwidth_iso(n, cfg.f.spec.beta(), cfg.f.spec.dim(), cfg.c_h);
      return fit_local_poly(data, cfg.f.spec, h);
    }
    case MethodKind::AnisoKernel: {
      Vec h = cfg.bandwidth > 0.0 ? Vec(cfg.f.spec.dim(), cfg.bandwidth)
                                  : bandwidth_aniso(n, cfg.f.spec, cfg.c_h);
      return fit_aniso_kernel(data, cfg.f.spec, std::move(h));
    }
    case MethodKind::Exact:
      return FittedPredictor::exact(cfg.f);
    case MethodKind::Constant:
      return FittedPredictor::constant(cfg.constant_value, cfg.f.spec.dim());
    case MethodKind::Midpoint:
      break;
  }
  throw std::invalid_argument("experiment: the base estimator cannot be a midpoint transform");
}

double max_abs_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

struct MeanStderr {
  double mean = 0.0, se = 0.0;
};

MeanStderr mean_and_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  const std::size_t r = xs.size();
  if (r == 0) return out;
  double s = 0.0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(r);
  if (r > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(r - 1)) / std::sqrt(static_cast<double>(r));
  }
  return out;
}

struct LinFit {
  double slope = 0.0, intercept = 0.0, max_residual = 0.0;
};

LinFit least_squares(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t k = t.size();
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (y[i] - my);
  }
  LinFit fit;
  if (stt == 0.0) throw std::invalid_argument("rate fit: abscissae are all equal");
  fit.slope = sty / stt;
  fit.intercept = my - fit.slope * mt;
  for (std::size_t i = 0; i < k; ++i)
    fit.max_residual =
        std::max(fit.max_residual, std::fabs(y[i] - (fit.intercept + fit.slope * t[i])));
  return fit;
}

}  // namespace

int aligned_sample_resolution(const PerturbationSet& set, const GridDomain& domain,
                              int requested) {
  if (requested > 0) return requested;
  if (set.kind() == PerturbKind::Singleton) return 1;
  if (set.kind() == PerturbKind::FinitePoints)
    return static_cast<int>(set.points().size());  // sample() returns the points as-is

  const Vec ranges = coord_ranges(set, PerturbationSample{});
  // Steps range_i/(r-1) land on the lattice when (r-1) divides every
  // range_i/spacing_i; the gcd of those counts is the densest such choice.
  long long g = 0;
  bool commensurate = true;
  for (int k = 0; k < set.dim() && commensurate; ++k) {
    if (ranges[k] <= 0.0) continue;
    const double ratio = ranges[k] / domain.spacing()[k];
    const long long rounded = std::llround(ratio);
    if (rounded < 1 || std::fabs(ratio - static_cast<double>(rounded)) > 1e-9 * ratio)
      commensurate = false;
    else
      g = std::gcd(g, rounded);
  }
  if (commensurate && g > 0) {
    constexpr long long kCap = 1024;
    long long steps = g;
    if (steps > kCap) {
      for (long long c = kCap; c >= 1; --c)
        if (g % c == 0) {
          steps = c;
          break;
        }
    }
    return static_cast<int>(steps + 1);
  }
  switch (domain.dim()) {
    case 1: return 33;
    case 2: return 9;
    default: return 5;
  }
}

PerturbationSet with_radius(const PerturbationSet& pattern, double q) {
  if (q < 0.0) throw std::invalid_argument("with_radius: radius must be >= 0");
  if (q == 0.0) return PerturbationSet::singleton(pattern.dim());
  switch (pattern.kind()) {
    case PerturbKind::LpBall:
      return PerturbationSet::lp_ball(pattern.p(), q, pattern.dim());
    case PerturbKind::SparseLpBall:
      return PerturbationSet::sparse_lp_ball(pattern.p(), q, pattern.max_nonzero(),
                                             pattern.dim());
    case PerturbKind::Box: {
      double hw_max = 0.0;
      for (double a : pattern.half_widths()) hw_max = std::max(hw_max, a);
      if (hw_max == 0.0)
        throw std::invalid_argument("with_radius: zero box pattern cannot grow");
      Vec hw = pattern.half_widths();
      for (double& a : hw) a = a / hw_max * q;
      return PerturbationSet::box(std::move(hw));
    }
    case PerturbKind::Singleton:
      throw std::invalid_argument("with_radius: singleton pattern cannot grow");
    case PerturbKind::Segment:
    case PerturbKind::FinitePoints:
      break;
  }
  throw std::invalid_argument("with_radius: radius sweeps need a ball or box pattern");
}

RiskEstimate estimate_risk(const ExperimentConfig& cfg, std::size_t n) {
  if (cfg.replicates < 1) throw std::invalid_argument("experiment: replicates must be >= 1");
  const GridDomain domain = make_domain(cfg);
  const PerturbationSet set = effective_set(cfg, n);
  const PerturbationSample samp =
      sample(set, aligned_sample_resolution(set, domain, cfg.sample_resolution));
  const auto plan = detail::build_plan(domain, set, samp);
  const auto fv = detail::lattice_values(cfg.f, domain);

  RiskEstimate out;
  out.q = radius_report(set, samp);
  out.ideal = detail::ideal_loss_from_values(fv, plan).value;
  const int r_count = cfg.replicates;
  out.losses.assign(r_count, 0.0);
  out.standard_losses.assign(r_count, 0.0);
  out.seeds.resize(r_count);
  for (int r = 0; r < r_count; ++r) out.seeds[r] = cfg.master_seed + static_cast<std::uint64_t>(r);

  parallel_for(cfg.jobs, r_count, [&](int r) {
    const Dataset data = generate(cfg.f, n, cfg.noise_sd, out.seeds[r]);
    const FittedPredictor base = fit_base(cfg, data, n);
    const auto bv = detail::lattice_values(base, domain);
    out.standard_losses[r] = max_abs_gap(fv, bv);
    const auto table = detail::midpoint_table(bv, plan);
    out.losses[r] = detail::loss_against_table(fv, table, plan).value;
  });

  const auto ms = mean_and_stderr(out.losses);
  out.mean = ms.mean;
  out.stderr_mean = ms.se;
  return out;
}

RateFit rate_fit(const std::vector<std::size_t>& ns, const std::vector<double>& risks) {
  if (ns.size() != risks.size())
    throw std::invalid_argument("rate fit: sample sizes and risks differ in length");
  if (ns.size() < 3) throw std::invalid_argument("rate fit: need at least 3 points");
  std::vector<double> t(ns.size()), y(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 2) throw std::invalid_argument("rate fit: sample sizes must be >= 2");
    if (!(risks[i] > 0.0))
      throw NonPositiveRisk("rate fit: risk at n=" + std::to_string(ns[i]) +
                            " is not positive");
    const double nn = static_cast<double>(ns[i]);
    t[i] = std::log(std::log(nn) / nn);
    y[i] = std::log(risks[i]);
  }
  const LinFit fit = least_squares(t, y);
  return RateFit{fit.slope, fit.intercept, fit.max_residual};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.n_grid.empty()) throw std::invalid_argument("experiment: empty n grid");
  for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
    if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
      throw std::invalid_argument("experiment: n grid must be strictly increasing");

  ExperimentResult res;
  for (const std::size_t n : cfg.n_grid) {
    const RiskEstimate est = estimate_risk(cfg, n);
    res.ns.push_back(n);
    res.mean_risks.push_back(est.mean);
    res.stderr_risks.push_back(est.stderr_mean);
    res.ideal_losses.push_back(est.ideal);
    res.qs.push_back(est.q);
    res.mean_standard.push_back(mean_and_stderr(est.standard_losses).mean);
    for (int r = 0; r < cfg.replicates; ++r) {
      ExperimentRow row;
      row.n = n;
      row.replicate = r;
      row.seed = est.seeds[r];
      row.loss = est.losses[r];
      row.standard_loss = est.standard_losses[r];
      row.ideal_loss = est.ideal;
      row.q = est.q;
      res.rows.push_back(row);
    }
  }
  if (res.ns.size() >= 3 &&
      std::all_of(res.mean_risks.begin(), res.mean_risks.end(),
                  [](double v) { return v > 0.0; })) {
    res.fit = rate_fit(res.ns, res.mean_risks);
    res.has_fit = true;
  }
  return res;
}

void write_csv(const ExperimentResult& result, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(result.rows.size());
  for (const auto& r : result.rows)
    rows.push_back({std::to_string(r.n), std::to_string(r.replicate), std::to_string(r.seed),
                    format_double(r.loss), format_double(r.standard_loss),
                    format_double(r.ideal_loss), format_double(r.q)});
  write_csv_file(path, {"n", "replicate", "seed", "loss", "standard_loss", "ideal_loss", "q"},
                 rows);
}

std::vector<PhaseRow> phase_sweep(const ExperimentConfig& cfg,
                                  const std::vector<double>& q_grid) {
  if (cfg.n_grid.empty()) throw std::invalid_argument("phase sweep: empty n grid");
  if (q_grid.empty()) throw std::invalid_argument("phase sweep: empty radius grid");
  for (std::size_t i = 1; i < q_grid.size(); ++i)
    if (q_grid[i] <= q_grid[i - 1])
      throw std::invalid_argument("phase sweep: radius grid must be strictly increasing");
  const std::size_t n = cfg.n_grid.front();
  const GridDomain domain = make_domain(cfg);
  const auto fv = detail::lattice_values(cfg.f, domain);
  const int r_count = cfg.replicates;

  // One base fit per replicate, shared by every radius.
  std::vector<std::vector<double>> base_values(r_count);
  std::vector<double> standard_losses(r_count, 0.0);
  parallel_for(cfg.jobs, r_count, [&](int r) {
    const std::uint64_t seed = cfg.master_seed + static_cast<std::uint64_t>(r);
    const Dataset data = generate(cfg.f, n, cfg.noise_sd, seed);
    const FittedPredictor base = fit_base(cfg, data, n);
    base_values[r] = detail::lattice_values(base, domain);
    standard_losses[r] = max_abs_gap(fv, base_values[r]);
  });
  const double standard_risk = mean_and_stderr(standard_losses).mean;

  std::vector<PhaseRow> rows;
  rows.reserve(q_grid.size());
  for (const double q : q_grid) {
    const PerturbationSet set = with_radius(cfg.perturbation, q);
    const PerturbationSample samp =
        sample(set, aligned_sample_resolution(set, domain, cfg.sample_resolution));
    const auto plan = detail::build_plan(domain, set, samp);
    PhaseRow row;
    row.q = q;
    row.ideal_loss = detail::ideal_loss_from_values(fv, plan).value;
    row.standard_risk = standard_risk;
    std::vector<double> losses(r_count, 0.0);
    parallel_for(cfg.jobs, r_count, [&](int r) {
      const auto table = detail::midpoint_table(base_values[r], plan);
      losses[r] = detail::loss_against_table(fv, table, plan).value;
    });
    const auto ms = mean_and_stderr(losses);
    row.mean_risk = ms.mean;
    row.stderr_risk = ms.se;
    rows.push_back(row);
  }
  return rows;
}

AnisoResult aniso_comparison(const ExperimentConfig& cfg, const std::vector<double>& q_grid) {
  const SmoothnessSpec& spec = cfg.f.spec;
  if (spec.holder_class() != HolderClass::Anisotropic)
    throw std::invalid_argument("anisotropic comparison: needs an anisotropic smoothness spec");
  const double bbar = spec.beta_bar();
  if (!(bbar < 1.0))
    throw std::invalid_argument("anisotropic comparison: averaged exponent must be < 1");
  if (q_grid.empty()) throw std::invalid_argument("anisotropic comparison: empty radius grid");
  for (std::size_t i = 1; i < q_grid.size(); ++i)
    if (q_grid[i] <= q_grid[i - 1])
      throw std::invalid_argument("anisotropic comparison: radius grid must be strictly increasing");

  const GridDomain domain = make_domain(cfg);
  const int d = spec.dim();

  // Attacked axis: the coordinate where range^beta is largest at the widest radius.
  const PerturbationSet widest = with_radius(cfg.perturbation, q_grid.back());
  const Vec ranges = coord_ranges(widest, PerturbationSample{});
  int axis = 0;
  double best = -1.0;
  for (int k = 0; k < d; ++k) {
    const double scale = ranges[k] > 0.0 ? std::pow(ranges[k], spec.beta_vec()[k]) : 0.0;
    if (scale > best) {
      best = scale;
      axis = k;
    }
  }

  const RegressionFunction aniso_f = witness_aniso(spec, axis);
  const RegressionFunction iso_f{
      [axis, bbar](const Vec& x) { return std::pow(std::max(x[axis], 0.0), bbar); },
      SmoothnessSpec::isotropic(bbar, 1.0, d), "iso_witness"};
  const auto aniso_values = detail::lattice_values(aniso_f, domain);
  const auto iso_values = detail::lattice_values(iso_f, domain);

  AnisoResult res;
  res.attacked_axis = axis;
  std::vector<double> ts, ya, yi;
  for (const double q : q_grid) {
    const PerturbationSet set = with_radius(cfg.perturbation, q);
    const PerturbationSample samp =
        sample(set, aligned_sample_resolution(set, domain, cfg.sample_resolution));
    const auto plan = detail::build_plan(domain, set, samp);
    AnisoRow row;
    row.q = q;
    row.aniso_ideal = detail::ideal_loss_from_values(aniso_values, plan).value;
    row.iso_ideal = detail::ideal_loss_from_values(iso_values, plan).value;
    row.ratio = row.iso_ideal > 0.0 ? row.aniso_ideal / row.iso_ideal : 0.0;
    res.rows.push_back(row);
    if (q > 0.0 && row.aniso_ideal > 0.0 && row.iso_ideal > 0.0) {
      ts.push_back(std::log(q));
      ya.push_back(std::log(row.aniso_ideal));
      yi.push_back(std::log(row.iso_ideal));
    }
  }
  if (ts.size() >= 2) {
    res.aniso_slope = least_squares(ts, ya).slope;
    res.iso_slope = least_squares(ts, yi).slope;
  }
  return res;
}

void write_phase_csv(const std::vector<PhaseRow>& rows, const std::string& path) {
  std::vector<std::vector<std::string>> cells;
  cells.reserve(rows.size());
  for (const auto& r : rows)
    cells.push_back({format_double(r.q), format_double(r.mean_risk),
                     format_double(r.stderr_risk), format_double(r.ideal_loss),
                     format_double(r.standard_risk)});
  write_csv_file(path, {"q", "mean_risk", "stderr", "ideal_loss", "standard_risk"}, cells);
}

void write_aniso_csv(const AnisoResult& result, const std::string& path) {
  std::vector<std::vector<std::string>> cells;
  cells.reserve(result.rows.size());
  for (const auto& r : result.rows)
    cells.push_back({format_double(r.q), format_double(r.aniso_ideal),
                     format_double(r.iso_ideal), format_double(r.ratio)});
  write_csv_file(path, {"q", "aniso_ideal", "iso_ideal", "ratio"}, cells);
}

}  // namespace advreg
