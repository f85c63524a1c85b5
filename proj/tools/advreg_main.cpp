// Command line front end: loss evaluation, fitting, Monte Carlo risk studies,
// radius sweeps, and the built-in selftest. Every CSV-producing command is
// deterministic in (config, seed) and independent of --jobs.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advreg/adversarial.hpp"
#include "advreg/config.hpp"
#include "advreg/csv.hpp"
#include "advreg/errors.hpp"
#include "advreg/estimators.hpp"
#include "advreg/experiments.hpp"
#include "advreg/functions.hpp"
#include "advreg/grid.hpp"
#include "advreg/perturbation.hpp"
#include "advreg/selftest.hpp"

namespace {

using namespace advreg;

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  int lattice = 0;
  int sample_res = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* lattice_opt = nullptr;
  CLI::Option* sample_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

CommonOpts* attach_common(CLI::App* cmd, std::vector<std::unique_ptr<CommonOpts>>& store,
                          bool needs_config) {
  store.push_back(std::make_unique<CommonOpts>());
  CommonOpts* o = store.back().get();
  if (needs_config)
    cmd->add_option("-c,--config", o->config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
  o->out_opt = cmd->add_option("-o,--out", o->out_path, "CSV output path");
  o->seed_opt = cmd->add_option("--seed", o->seed, "override the config seed");
  cmd->add_option("-j,--jobs", o->jobs, "worker threads")->check(CLI::PositiveNumber);
  o->lattice_opt = cmd->add_option("--lattice-resolution", o->lattice,
                                   "override the evaluation lattice resolution");
  o->sample_opt = cmd->add_option("--sample-resolution", o->sample_res,
                                  "override the perturbation sample resolution");
  return o;
}

CliConfig load_with_overrides(const CommonOpts& o) {
  CliConfig cfg = load_config(o.config_path);
  if (o.seed_opt->count() > 0) cfg.seed = o.seed;
  if (o.lattice_opt->count() > 0) cfg.lattice_resolution = o.lattice;
  if (o.sample_opt->count() > 0) cfg.sample_resolution = o.sample_res;
  return cfg;
}

void require(bool present, const std::string& key, const std::string& command) {
  if (!present) throw ConfigError("config: '" + command + "' needs the '" + key + "' entry");
}

GridDomain make_domain(const CliConfig& cfg) {
  const int dim = cfg.f.spec.dim();
  const int res =
      cfg.lattice_resolution > 0 ? cfg.lattice_resolution : GridDomain::default_resolution(dim);
  return GridDomain::unit_cube(dim, res);
}

ExperimentConfig to_experiment(const CliConfig& cfg, int jobs) {
  ExperimentConfig e;
  e.f = cfg.f;
  if (cfg.has_perturbation)
    e.perturbation = cfg.perturbation;
  else
    e.perturbation = PerturbationSet::singleton(cfg.f.spec.dim());
  e.q_scale = cfg.q_scale;
  e.q_exponent = cfg.q_exponent;
  e.method = cfg.method;
  e.c_h = cfg.c_h;
  e.bandwidth = cfg.bandwidth;
  e.constant_value = cfg.constant_value;
  e.n_grid = cfg.n_grid.empty() && cfg.has_n ? std::vector<std::size_t>{cfg.n} : cfg.n_grid;
  e.replicates = cfg.replicates;
  e.noise_sd = cfg.noise_sd;
  e.master_seed = cfg.seed;
  e.lattice_resolution = cfg.lattice_resolution;
  e.sample_resolution = cfg.sample_resolution;
  e.jobs = jobs;
  return e;
}

FittedPredictor make_predictor(const CliConfig& cfg) {
  const PredictorConfig& pc = cfg.predictor;
  const int dim = cfg.f.spec.dim();
  switch (pc.method) {
    case MethodKind::Exact:
      return FittedPredictor::exact(cfg.f);
    case MethodKind::Constant:
      return FittedPredictor::constant(pc.value, dim);
    case MethodKind::LocalPoly: {
      const Dataset data = generate(cfg.f, pc.n, pc.noise_sd, pc.seed);
      const double h = pc.bandwidth > 0
                           ? pc.bandwidth
                           : bandwidth_iso(pc.n, cfg.f.spec.beta(), dim, pc.c_h);
      return fit_local_poly(data, cfg.f.spec, h);
    }
    case MethodKind::AnisoKernel: {
      const Dataset data = generate(cfg.f, pc.n, pc.noise_sd, pc.seed);
      const Vec h = pc.bandwidth > 0 ? Vec(static_cast<std::size_t>(dim), pc.bandwidth)
                                     : bandwidth_aniso(pc.n, cfg.f.spec, pc.c_h);
      return fit_aniso_kernel(data, cfg.f.spec, h);
    }
    default:
      throw ConfigError("config: unsupported predictor method");
  }
}

std::vector<std::string> loss_header(int dim) {
  std::vector<std::string> h{"value"};
  for (int k = 1; k <= dim; ++k) h.push_back("argmax_x_" + std::to_string(k));
  for (int k = 1; k <= dim; ++k) h.push_back("argmax_delta_" + std::to_string(k));
  h.push_back("grid_spacing");
  return h;
}

std::vector<std::string> loss_row(const LossReport& r) {
  std::vector<std::string> row{format_double(r.value)};
  for (double v : r.argmax_x) row.push_back(format_double(v));
  for (double v : r.argmax_delta) row.push_back(format_double(v));
  row.push_back(format_double(r.grid_spacing));
  return row;
}

void print_loss(const LossReport& r) {
  std::cout << "value=" << format_double(r.value);
  std::cout << " argmax_x=";
  for (std::size_t k = 0; k < r.argmax_x.size(); ++k)
    std::cout << (k ? "," : "") << format_double(r.argmax_x[k]);
  std::cout << " argmax_delta=";
  for (std::size_t k = 0; k < r.argmax_delta.size(); ++k)
    std::cout << (k ? "," : "") << format_double(r.argmax_delta[k]);
  std::cout << " grid_spacing=" << format_double(r.grid_spacing) << "\n";
}

int run_eval_loss(const CommonOpts& o) {
  const CliConfig cfg = load_with_overrides(o);
  require(cfg.has_function, "function", "eval-loss");
  require(cfg.has_perturbation, "perturbation", "eval-loss");
  require(cfg.predictor.present, "predictor", "eval-loss");
  const GridDomain domain = make_domain(cfg);
  const PerturbationSample samp =
      sample(cfg.perturbation, aligned_sample_resolution(cfg.perturbation, domain,
                                                         cfg.sample_resolution));
  const FittedPredictor p = make_predictor(cfg);
  const LossReport r = adversarial_loss(cfg.f, p, domain, cfg.perturbation, samp);
  print_loss(r);
  if (o.out_opt->count() > 0)
    write_csv_file(o.out_path, loss_header(cfg.f.spec.dim()), {loss_row(r)});
  return 0;
}

int run_ideal_loss(const CommonOpts& o) {
  const CliConfig cfg = load_with_overrides(o);
  require(cfg.has_function, "function", "ideal-loss");
  require(cfg.has_perturbation, "perturbation", "ideal-loss");
  const GridDomain domain = make_domain(cfg);
  const PerturbationSample samp =
      sample(cfg.perturbation, aligned_sample_resolution(cfg.perturbation, domain,
                                                         cfg.sample_resolution));
  const LossReport r = ideal_loss(cfg.f, domain, cfg.perturbation, samp);
  print_loss(r);
  if (o.out_opt->count() > 0)
    write_csv_file(o.out_path, loss_header(cfg.f.spec.dim()), {loss_row(r)});
  return 0;
}

int run_fit(const CommonOpts& o) {
  const CliConfig cfg = load_with_overrides(o);
  require(cfg.has_function, "function", "fit");
  require(cfg.has_estimator, "estimator", "fit");
  require(cfg.has_n, "n", "fit");
  const int dim = cfg.f.spec.dim();
  const Dataset data = generate(cfg.f, cfg.n, cfg.noise_sd, cfg.seed);
  FittedPredictor p;
  switch (cfg.method) {
    case MethodKind::LocalPoly:
      p = fit_local_poly(data, cfg.f.spec,
                         cfg.bandwidth > 0
                             ? cfg.bandwidth
                             : bandwidth_iso(cfg.n, cfg.f.spec.beta(), dim, cfg.c_h));
      break;
    case MethodKind::AnisoKernel:
      p = fit_aniso_kernel(data, cfg.f.spec,
                           cfg.bandwidth > 0 ? Vec(static_cast<std::size_t>(dim), cfg.bandwidth)
                                             : bandwidth_aniso(cfg.n, cfg.f.spec, cfg.c_h));
      break;
    case MethodKind::Constant:
      p = FittedPredictor::constant(cfg.constant_value, dim);
      break;
    case MethodKind::Exact:
      p = FittedPredictor::exact(cfg.f);
      break;
    default:
      throw ConfigError("config: unsupported estimator method");
  }
  const GridDomain domain = make_domain(cfg);
  const LossReport r = standard_loss(cfg.f, p, domain);
  std::cout << "standard_loss=" << format_double(r.value)
            << " bandwidth=";
  const Vec& hs = p.method().bandwidths;
  if (hs.empty())
    std::cout << "none";
  else
    for (std::size_t k = 0; k < hs.size(); ++k) std::cout << (k ? "," : "") << format_double(hs[k]);
  std::cout << "\n";
  if (o.out_opt->count() > 0) {
    std::vector<std::string> header;
    for (int k = 1; k <= dim; ++k) header.push_back("x_" + std::to_string(k));
    header.push_back("prediction");
    header.push_back("truth");
    std::vector<std::vector<std::string>> rows;
    rows.reserve(domain.size());
    for (std::size_t i = 0; i < domain.size(); ++i) {
      const Vec x = domain.point(i);
      std::vector<std::string> row;
      for (double c : x) row.push_back(format_double(c));
      row.push_back(format_double(p(x)));
      row.push_back(format_double(cfg.f(x)));
      rows.push_back(std::move(row));
    }
    write_csv_file(o.out_path, header, rows);
  }
  return 0;
}

int run_risk(const CommonOpts& o) {
  const CliConfig cfg = load_with_overrides(o);
  require(cfg.has_function, "function", "risk");
  require(cfg.has_estimator, "estimator", "risk");
  require(cfg.has_n || !cfg.n_grid.empty(), "n", "risk");
  ExperimentConfig e = to_experiment(cfg, o.jobs);
  if (cfg.has_n) e.n_grid = {cfg.n};
  const ExperimentResult result = run_experiment(e);
  std::cout << "mean_risk=" << format_double(result.mean_risks[0])
            << " stderr=" << format_double(result.stderr_risks[0])
            << " ideal_loss=" << format_double(result.ideal_losses[0])
            << " q=" << format_double(result.qs[0]) << "\n";
  if (o.out_opt->count() > 0) write_csv(result, o.out_path);
  return 0;
}

int run_rate_fit(const CommonOpts& o) {
  const CliConfig cfg = load_with_overrides(o);
  require(cfg.has_function, "function", "rate-fit");
  require(cfg.has_estimator, "estimator", "rate-fit");
  if (cfg.n_grid.size() < 3)
    throw ConfigError("config: 'rate-fit' needs an 'n_grid' with at least three sizes");
  const ExperimentConfig e = to_experiment(cfg, o.jobs);
  const ExperimentResult result = run_experiment(e);
  std::cout << "slope=" << format_double(result.fit.slope)
            << " intercept=" << format_double(result.fit.intercept)
            << " max_residual=" << format_double(result.fit.max_residual) << "\n";
  if (o.out_opt->count() > 0) write_csv(result, o.out_path);
  return 0;
}

int run_phase_sweep(const CommonOpts& o) {
  const CliConfig cfg = load_with_overrides(o);
  require(cfg.has_function, "function", "phase-sweep");
  require(cfg.has_perturbation, "perturbation", "phase-sweep");
  require(cfg.has_estimator, "estimator", "phase-sweep");
  require(cfg.has_n || !cfg.n_grid.empty(), "n", "phase-sweep");
  if (cfg.q_grid.empty())
    throw ConfigError("config: 'phase-sweep' needs a non-empty 'q_grid'");
  ExperimentConfig e = to_experiment(cfg, o.jobs);
  if (cfg.has_n) e.n_grid = {cfg.n};
  const std::vector<PhaseRow> rows = phase_sweep(e, cfg.q_grid);
  double tail_slope = 0.0;
  for (std::size_t i = rows.size(); i-- > 1;) {
    const PhaseRow& a = rows[i - 1];
    const PhaseRow& b = rows[i];
    if (a.q > 0 && b.q > 0 && a.mean_risk > 0 && b.mean_risk > 0) {
      tail_slope = (std::log(b.mean_risk) - std::log(a.mean_risk)) /
                   (std::log(b.q) - std::log(a.q));
      break;
    }
  }
  std::cout << "rows=" << rows.size() << " base_risk=" << format_double(rows.front().mean_risk)
            << " tail_slope=" << format_double(tail_slope) << "\n";
  if (o.out_opt->count() > 0) write_phase_csv(rows, o.out_path);
  return 0;
}

int run_aniso_compare(const CommonOpts& o) {
  const CliConfig cfg = load_with_overrides(o);
  require(cfg.has_function, "function", "aniso-compare");
  require(cfg.has_perturbation, "perturbation", "aniso-compare");
  if (cfg.q_grid.empty())
    throw ConfigError("config: 'aniso-compare' needs a non-empty 'q_grid'");
  if (cfg.f.spec.holder_class() != HolderClass::Anisotropic)
    throw ConfigError("config: 'aniso-compare' needs an anisotropic function");
  const ExperimentConfig e = to_experiment(cfg, o.jobs);
  const AnisoResult result = aniso_comparison(e, cfg.q_grid);
  std::cout << "aniso_slope=" << format_double(result.aniso_slope)
            << " iso_slope=" << format_double(result.iso_slope)
            << " attacked_axis=" << result.attacked_axis + 1 << "\n";
  if (o.out_opt->count() > 0) write_aniso_csv(result, o.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sup-norm regression losses under adversarial input perturbations"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<CommonOpts>> store;

  CLI::App* eval_cmd = app.add_subcommand(
      "eval-loss", "adversarial loss of a predictor from the config");
  CommonOpts* eval_opts = attach_common(eval_cmd, store, true);

  CLI::App* ideal_cmd =
      app.add_subcommand("ideal-loss", "best achievable adversarial loss for the function");
  CommonOpts* ideal_opts = attach_common(ideal_cmd, store, true);

  CLI::App* fit_cmd =
      app.add_subcommand("fit", "fit once and report the standard sup-norm loss");
  CommonOpts* fit_opts = attach_common(fit_cmd, store, true);

  CLI::App* risk_cmd =
      app.add_subcommand("risk", "Monte Carlo adversarial risk of the plug-in at one n");
  CommonOpts* risk_opts = attach_common(risk_cmd, store, true);

  CLI::App* rate_cmd = app.add_subcommand(
      "rate-fit", "risk over an n-grid with a log-log convergence rate fit");
  CommonOpts* rate_opts = attach_common(rate_cmd, store, true);

  CLI::App* phase_cmd = app.add_subcommand(
      "phase-sweep", "risk decomposition across perturbation radii at fixed n");
  CommonOpts* phase_opts = attach_common(phase_cmd, store, true);

  CLI::App* aniso_cmd = app.add_subcommand(
      "aniso-compare", "anisotropic vs isotropic ideal loss across radii");
  CommonOpts* aniso_opts = attach_common(aniso_cmd, store, true);

  CLI::App* selftest_cmd =
      app.add_subcommand("selftest", "built-in randomized invariant checks");
  CommonOpts* selftest_opts = attach_common(selftest_cmd, store, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; every real usage error maps to 2
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(eval_cmd)) return run_eval_loss(*eval_opts);
    if (app.got_subcommand(ideal_cmd)) return run_ideal_loss(*ideal_opts);
    if (app.got_subcommand(fit_cmd)) return run_fit(*fit_opts);
    if (app.got_subcommand(risk_cmd)) return run_risk(*risk_opts);
    if (app.got_subcommand(rate_cmd)) return run_rate_fit(*rate_opts);
    if (app.got_subcommand(phase_cmd)) return run_phase_sweep(*phase_opts);
    if (app.got_subcommand(aniso_cmd)) return run_aniso_compare(*aniso_opts);
    if (app.got_subcommand(selftest_cmd)) {
      const std::uint64_t seed =
          selftest_opts->seed_opt->count() > 0 ? selftest_opts->seed : 42;
      return advreg::selftest::run_and_report(std::cout, seed) ? 0 : 1;
    }
  } catch (const advreg::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const advreg::InsufficientData& e) {
    std::cerr << "error: " << e.what() << " (dataset seed " << e.seed << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
