// End-to-end acceptance gate. Each check prints exactly one PASS/FAIL line
// with a short diagnostic and its wall time; the process exits nonzero if any
// check fails. Checks 1-2 exercise the loss identities on randomized
// lattice-commensurate instances, 3 the pathwise risk sandwich, 4-7 the
// closed-form exponents and Monte Carlo rates, 8 byte-level determinism of
// the command line tool (driven through ADVREG_BIN when set).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <vector>

#include "advreg/adversarial.hpp"
#include "advreg/errors.hpp"
#include "advreg/estimators.hpp"
#include "advreg/experiments.hpp"
#include "advreg/functions.hpp"
#include "advreg/grid.hpp"
#include "advreg/perturbation.hpp"
#include "advreg/selftest.hpp"

using namespace advreg;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(n);
  ybar /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (xs[i] - xbar) * (ys[i] - ybar);
    den += (xs[i] - xbar) * (xs[i] - xbar);
  }
  return num / den;
}

int default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 1u : hw, 8u));
}

// 1: the two evaluation orders of the adversarial loss agree on randomized
// instances covering every perturbation kind in one and two dimensions.
Outcome check_order_exchange() {
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto inst = selftest::random_instance(rng, i % 2 ? 2 : 1);
    auto inflated = std::make_shared<const GridDomain>(
        perturbed_domain(inst.domain, inst.set, inst.samp));
    const auto p = selftest::random_table(rng, inflated);
    const auto a = adversarial_loss(inst.f, p, inst.domain, inst.set, inst.samp);
    const auto b = adversarial_loss_swapped(inst.f, p, inst.domain, inst.set, inst.samp);
    worst = std::max(worst, std::fabs(a.value - b.value));
  }
  return {worst <= 1e-12, "1000 instances, max |direct - swapped| = " + fmt(worst)};
}

// 2: the midpoint predictor attains the ideal loss and no tabulated
// competitor beats it.
Outcome check_midpoint_optimality() {
  Rng rng(4045);
  double worst_eq = 0.0;
  double worst_opt = -kInf;
  for (int i = 0; i < 200; ++i) {
    const auto inst = selftest::random_instance(rng, i % 2 ? 2 : 1);
    const auto best = ideal_loss(inst.f, inst.domain, inst.set, inst.samp);
    const auto fstar = ideal_predictor(inst.f, inst.set, inst.samp, inst.domain);
    const auto achieved = adversarial_loss(inst.f, fstar, inst.domain, inst.set, inst.samp);
    worst_eq = std::max(worst_eq, std::fabs(achieved.value - best.value));

    const auto plan = detail::build_plan(inst.domain, inst.set, inst.samp);
    const auto f_values = detail::lattice_values(inst.f, *plan.domain);
    std::vector<double> table(plan.inflated->size());
    for (int c = 0; c < 50; ++c) {
      for (double& v : table) v = 2.0 * rng.uniform() - 1.0;
      const auto other = detail::loss_against_table(f_values, table, plan);
      worst_opt = std::max(worst_opt, best.value - other.value);
    }
  }
  const bool pass = worst_eq <= 1e-12 && worst_opt <= 1e-12;
  return {pass, "200 instances x 50 candidates, max |achieved - best| = " + fmt(worst_eq) +
                    ", max (best - candidate) = " + fmt(worst_opt)};
}

// 3: every Monte Carlo replicate satisfies
// max(standard(plug-in), ideal) <= adversarial(plug-in) <= standard(base) + 3 ideal
// with no tolerance.
Outcome check_pathwise_sandwich() {
  const GridDomain domain = GridDomain::unit_cube(1, 1025);
  const std::vector<RegressionFunction> funcs = {witness_iso_smooth(1.0, 1.0, 1),
                                                 witness_iso_rough(0.5, 1)};
  const std::vector<std::size_t> ns = {256, 1024};
  const std::vector<double> qs = {0.0, 0.02, 0.1};
  std::uint64_t seed = 9001;
  int fits = 0, violations = 0;
  for (const auto& f : funcs)
    for (std::size_t n : ns)
      for (double q : qs) {
        const auto set =
            q > 0.0 ? PerturbationSet::lp_ball(kInf, q, 1) : PerturbationSet::singleton(1);
        const auto samp = sample(set, aligned_sample_resolution(set, domain, 0));
        const double ideal = ideal_loss(f, domain, set, samp).value;
        for (int rep = 0; rep < 17; ++rep) {
          const auto data = generate(f, n, 0.2, seed++);
          const auto base =
              fit_local_poly(data, f.spec, bandwidth_iso(n, f.spec.beta(), 1));
          const auto pi = plug_in(base, set, samp, domain);
          const double adv = adversarial_loss(f, pi, domain, set, samp).value;
          const double std_pi = standard_loss(f, pi, domain).value;
          const double std_base = standard_loss(f, base, domain).value;
          ++fits;
          if (!(std::max(std_pi, ideal) <= adv && adv <= std_base + 3.0 * ideal))
            ++violations;
        }
      }
  return {violations == 0,
          std::to_string(fits) + " fits, " + std::to_string(violations) + " violations"};
}

// 4: log-log slope of the ideal loss in the radius. The square-root witness
// gives 1/2; the smooth witness has ideal loss (1 - exp(-2q))/2, whose
// least-squares slope over this grid is 0.9603, short of the required 1+-0.02,
// so this check reports the honest number.
Outcome check_ideal_exponents() {
  const GridDomain domain = GridDomain::unit_cube(1, 1025);
  std::vector<double> log_q, log_rough, log_smooth;
  const auto rough = witness_iso_rough(0.5, 1);
  const auto smooth = witness_iso_smooth(1.0, 1.0, 1);
  for (int k = 7; k >= 3; --k) {
    const double q = std::ldexp(1.0, -k);
    const auto ball = PerturbationSet::lp_ball(kInf, q, 1);
    const auto samp = sample(ball, aligned_sample_resolution(ball, domain, 0));
    log_q.push_back(std::log(q));
    log_rough.push_back(std::log(ideal_loss(rough, domain, ball, samp).value));
    log_smooth.push_back(std::log(ideal_loss(smooth, domain, ball, samp).value));
  }
  const double s_rough = ls_slope(log_q, log_rough);
  const double s_smooth = ls_slope(log_q, log_smooth);
  const bool pass = std::fabs(s_rough - 0.5) <= 0.02 && std::fabs(s_smooth - 1.0) <= 0.02;
  return {pass, "rough slope = " + fmt(s_rough) + " (want 0.5+-0.02), smooth slope = " +
                    fmt(s_smooth) + " (want 1+-0.02)"};
}

// 5: with no perturbation the plug-in risk of the Lipschitz witness recovers
// the (log n / n)^{1/3} convergence slope.
Outcome check_standard_rate() {
  ExperimentConfig cfg;
  cfg.f = witness_iso_smooth(1.0, 1.0, 1);
  cfg.method = MethodKind::LocalPoly;
  cfg.n_grid = {512, 1024, 2048, 4096, 8192, 16384};
  cfg.replicates = 50;
  cfg.noise_sd = 0.2;
  cfg.master_seed = 31;
  cfg.jobs = default_jobs();
  const auto result = run_experiment(cfg);
  const double slope = result.fit.slope;
  return {std::fabs(slope - 1.0 / 3.0) <= 0.08,
          "rate slope = " + fmt(slope) + " (want 0.3333+-0.08), max residual = " +
              fmt(result.fit.max_residual)};
}

// 6: fixed n radius sweep. Tiny radii leave the risk at its no-attack level;
// past the transition the risk grows like q^{1/2}.
//
// The bandwidth constant matters here: x^{1/2} has its worst perturbation
// window at x = 0, exactly where the local mean's boundary bias peaks, and
// that bias adds to the window oscillation and flattens the measured tail
// slopes (c_h = 1 reads ~0.36-0.40). The bias shrinks like h^{1/2}, so a
// smaller constant keeps the readout clean; c_h in [0.15, 0.2] lands the
// slopes inside the band across seeds once the Monte Carlo noise is averaged
// down (per-pair slope sd ~0.003 at 512 replicates, ~0.03 at 24).
Outcome check_phase_transition() {
  ExperimentConfig cfg;
  cfg.f = witness_iso_rough(0.5, 1);
  cfg.perturbation = PerturbationSet::lp_ball(kInf, 1.0, 1);  // pattern
  cfg.method = MethodKind::LocalPoly;
  cfg.n_grid = {4096};
  cfg.replicates = 512;
  cfg.noise_sd = 0.2;
  cfg.master_seed = 57;
  cfg.c_h = 0.15;
  cfg.jobs = default_jobs();

  std::vector<double> q_grid{0.0};
  for (int k = 9; k >= 2; --k) q_grid.push_back(std::ldexp(1.0, -k));
  const auto rows = phase_sweep(cfg, q_grid);

  const double base = rows[0].mean_risk;
  const double flat_ratio = rows[1].mean_risk / base - 1.0;
  const bool flat_ok = std::fabs(flat_ratio) <= 0.10;

  bool slopes_ok = true;
  std::string slopes;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    if (rows[i].q < 0.0625) continue;  // local slope at q >= 2^-4, backward difference
    const double s = (std::log(rows[i].mean_risk) - std::log(rows[i - 1].mean_risk)) /
                     (std::log(rows[i].q) - std::log(rows[i - 1].q));
    slopes_ok = slopes_ok && s >= 0.42 && s <= 0.58;
    slopes += (slopes.empty() ? "" : ",") + fmt(s);
  }
  return {flat_ok && slopes_ok, "risk(2^-9)/risk(0) - 1 = " + fmt(flat_ratio) +
                                    " (want |.| <= 0.1), tail slopes = " + slopes +
                                    " (want within [0.42, 0.58])"};
}

// 7: single-axis attack on the anisotropic class. The witness along the
// attacked axis loses at rate q, the harmonic-mean isotropic witness at rate
// q^{1/2}, and their ratio shrinks monotonically as the radius shrinks.
Outcome check_aniso_separation() {
  ExperimentConfig cfg;
  const auto spec = SmoothnessSpec::anisotropic({1.0, 1.0 / 3.0}, {1.0, 1.0});
  cfg.f = witness_aniso(spec, 0);
  cfg.perturbation = PerturbationSet::box({1.0, 0.0});
  std::vector<double> q_grid;
  for (int k = 6; k >= 2; --k) q_grid.push_back(std::ldexp(1.0, -k));
  const auto result = aniso_comparison(cfg, q_grid);

  bool monotone = true;
  for (std::size_t i = 1; i < result.rows.size(); ++i)
    monotone = monotone && result.rows[i].ratio > result.rows[i - 1].ratio;
  const bool pass = std::fabs(result.aniso_slope - 1.0) <= 0.03 &&
                    std::fabs(result.iso_slope - 0.5) <= 0.03 && monotone;
  return {pass, "attacked-axis slope = " + fmt(result.aniso_slope) +
                    " (want 1+-0.03), averaged-exponent slope = " + fmt(result.iso_slope) +
                    " (want 0.5+-0.03), ratio monotone toward 0 = " +
                    (monotone ? "yes" : "no")};
}

// --- check 8 helpers -------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_quiet(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// 8: every CSV-producing command is byte-identical across a rerun and a
// different worker count.
Outcome check_csv_determinism() {
  namespace fs = std::filesystem;
  const char* bin = std::getenv("ADVREG_BIN");
  if (!bin) {
    // library-level fallback when the binary path is not provided
    ExperimentConfig cfg;
    cfg.f = witness_iso_rough(0.5, 1);
    cfg.perturbation = PerturbationSet::lp_ball(kInf, 0.0625, 1);
    cfg.n_grid = {64, 128};
    cfg.replicates = 3;
    cfg.master_seed = 12;
    cfg.lattice_resolution = 257;
    const fs::path dir = fs::temp_directory_path() / "advreg_accept";
    fs::create_directories(dir);
    const auto p1 = dir / "lib_a.csv", p2 = dir / "lib_b.csv", p3 = dir / "lib_c.csv";
    write_csv(run_experiment(cfg), p1.string());
    write_csv(run_experiment(cfg), p2.string());
    cfg.jobs = 3;
    write_csv(run_experiment(cfg), p3.string());
    const bool ok = slurp(p1) == slurp(p2) && slurp(p1) == slurp(p3);
    return {ok, "library level only (ADVREG_BIN unset)"};
  }

  const fs::path dir = fs::temp_directory_path() / "advreg_accept";
  fs::create_directories(dir);
  auto config = [&](const char* name, const std::string& body) {
    const fs::path p = dir / name;
    std::ofstream(p, std::ios::binary) << body;
    return p.string();
  };

  const std::string f2_ball = R"("function": {"kind": "witness_rough", "beta": 0.5},
    "perturbation": {"kind": "lp_ball", "p": "inf", "q": 0.0625})";
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"eval-loss", config("c_eval.json",
                           "{" + f2_ball + R"(, "lattice_resolution": 257,
        "predictor": {"method": "local_poly", "n": 128, "noise_sd": 0.2, "seed": 3}})")},
      {"ideal-loss", config("c_ideal.json", "{" + f2_ball + R"(, "lattice_resolution": 257})")},
      {"fit", config("c_fit.json", R"({"function": {"kind": "witness_rough", "beta": 0.5},
        "estimator": {"method": "local_poly"}, "n": 128, "noise_sd": 0.2, "seed": 4,
        "lattice_resolution": 129})")},
      {"risk", config("c_risk.json", "{" + f2_ball + R"(,
        "estimator": {"method": "local_poly"}, "n": 64, "replicates": 3,
        "noise_sd": 0.2, "seed": 12, "lattice_resolution": 257})")},
      {"rate-fit", config("c_rate.json", "{" + f2_ball + R"(,
        "estimator": {"method": "local_poly"}, "n_grid": [64, 128, 256],
        "replicates": 2, "noise_sd": 0.2, "seed": 8, "lattice_resolution": 257})")},
      {"phase-sweep", config("c_phase.json", R"({
        "function": {"kind": "witness_rough", "beta": 0.5},
        "perturbation": {"kind": "lp_ball", "p": "inf", "q": 1.0},
        "estimator": {"method": "local_poly"}, "n_grid": [128], "replicates": 2,
        "noise_sd": 0.2, "seed": 19, "lattice_resolution": 257,
        "q_grid": [0.0, 0.0625, 0.125]})")},
      {"aniso-compare", config("c_aniso.json", R"({
        "function": {"kind": "witness_aniso", "beta_vec": [1.0, 0.3333333333333333]},
        "perturbation": {"kind": "box", "half_widths": [1.0, 0.0]},
        "q_grid": [0.0625, 0.125], "lattice_resolution": 33})")},
  };

  int commands = 0;
  for (const auto& [cmd, cfg_path] : cases) {
    const auto out1 = (dir / (cmd + "_1.csv")).string();
    const auto out2 = (dir / (cmd + "_2.csv")).string();
    const auto out3 = (dir / (cmd + "_3.csv")).string();
    const std::string base = std::string(bin) + " " + cmd + " -c " + cfg_path;
    if (run_quiet(base + " -o " + out1) != 0 || run_quiet(base + " -o " + out2) != 0 ||
        run_quiet(base + " -o " + out3 + " --jobs 3") != 0)
      return {false, cmd + " exited nonzero"};
    const std::string first = slurp(out1);
    if (first.empty() || first != slurp(out2) || first != slurp(out3))
      return {false, cmd + " output differs across runs"};
    ++commands;
  }
  return {true, std::to_string(commands) + " commands byte-identical across reruns and --jobs"};
}

}  // namespace

int main() {
  struct Check {
    const char* name;
    double time_limit_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Check> checks = {
      {"order exchange", 30.0, check_order_exchange},
      {"midpoint optimality", 60.0, check_midpoint_optimality},
      {"pathwise sandwich", 120.0, check_pathwise_sandwich},
      {"ideal-loss exponents", 10.0, check_ideal_exponents},
      {"standard rate", 600.0, check_standard_rate},
      {"phase transition", 300.0, check_phase_transition},
      {"anisotropic separation", 120.0, check_aniso_separation},
      {"csv determinism", 600.0, check_csv_determinism},
  };

  bool all = true;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = checks[i].fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= checks[i].time_limit_s;
    const bool pass = out.pass && in_time;
    std::printf("criterion %zu (%s): %s (%s) [%.1fs%s]\n", i + 1, checks[i].name,
                pass ? "PASS" : "FAIL", out.detail.c_str(), secs,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
    all = all && pass;
  }
  std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
