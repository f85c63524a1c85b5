#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advreg/adversarial.hpp"
#include "advreg/estimators.hpp"
#include "advreg/functions.hpp"
#include "advreg/perturbation.hpp"

namespace advreg {

// One Monte Carlo study: function + perturbation + estimator + sampling plan.
// When q_exponent > 0 the perturbation radius shrinks with n as
// q_n = q_scale * n^{-q_exponent} (lp balls: the radius; boxes: the half-width
// pattern rescaled so its largest entry is q_n). Otherwise the perturbation is
// used exactly as given.
struct ExperimentConfig {
  RegressionFunction f;
  PerturbationSet perturbation = PerturbationSet::singleton(1);
  double q_scale = 0.0;
  double q_exponent = 0.0;
  MethodKind method = MethodKind::LocalPoly;
  double c_h = 1.0;
  double bandwidth = 0.0;               // > 0 overrides the rate formula
  double constant_value = 0.0;          // for the constant baseline method
  std::vector<std::size_t> n_grid;
  int replicates = 1;
  double noise_sd = 0.2;
  std::uint64_t master_seed = 1;
  int lattice_resolution = 0;           // 0: per-dimension default
  int sample_resolution = 0;            // 0: aligned automatically (see below)
  int jobs = 1;
};

// Sample resolution that makes the sampled perturbation steps integer
// multiples of the lattice spacing whenever the set's coordinate range is a
// lattice-commensurate length (so preimage windows are dense and losses are
// exact on the lattice); falls back to a per-dimension default otherwise.
int aligned_sample_resolution(const PerturbationSet& set, const GridDomain& domain,
                              int requested);

// The perturbation with its size replaced by radius q (lp balls and sparse
// balls: the radius; boxes: half-widths scaled to max entry q). Singleton for
// q = 0 sweeps on any kind.
PerturbationSet with_radius(const PerturbationSet& pattern, double q);

struct RiskEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;             // sample sd / sqrt(R); 0 when R = 1
  std::vector<double> losses;           // adversarial loss of the plug-in, per replicate
  std::vector<double> standard_losses;  // standard loss of the base fit, per replicate
  std::vector<std::uint64_t> seeds;     // master_seed + replicate index
  double ideal = 0.0;                   // ideal loss at this n's perturbation
  double q = 0.0;                       // effective radius used
};

// R replicates of generate -> fit -> midpoint transform -> adversarial loss.
// Deterministic in (cfg, n) and independent of cfg.jobs.
RiskEstimate estimate_risk(const ExperimentConfig& cfg, std::size_t n);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

// Least squares of log(risk) against log(log n / n). Risks must be positive
// (NonPositiveRisk) and at least three points are required. The slope is
// positive for risks decaying with n.
RateFit rate_fit(const std::vector<std::size_t>& ns, const std::vector<double>& risks);

struct ExperimentRow {
  std::size_t n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double loss = 0.0;
  double standard_loss = 0.0;
  double ideal_loss = 0.0;
  double q = 0.0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;  // n-major, replicate-minor
  std::vector<std::size_t> ns;
  std::vector<double> mean_risks, stderr_risks, ideal_losses, mean_standard, qs;
  RateFit fit;
  bool has_fit = false;  // set when the n-grid has >= 3 points
};

// estimate_risk over the whole n-grid plus the rate fit.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// CSV with columns n,replicate,seed,loss,standard_loss,ideal_loss,q.
void write_csv(const ExperimentResult& result, const std::string& path);

struct PhaseRow {
  double q = 0.0;
  double mean_risk = 0.0;
  double stderr_risk = 0.0;
  double ideal_loss = 0.0;
  double standard_risk = 0.0;  // mean standard loss of the base fits (q-free)
};

// Risk decomposition across an increasing radius grid at fixed n (the first
// entry of cfg.n_grid). Base fits are shared across radii, so the q = 0 row
// reproduces the no-attack risk exactly.
std::vector<PhaseRow> phase_sweep(const ExperimentConfig& cfg, const std::vector<double>& q_grid);

struct AnisoRow {
  double q = 0.0;
  double aniso_ideal = 0.0;  // witness aligned with the attacked axis
  double iso_ideal = 0.0;    // same-axis witness with the averaged exponent
  double ratio = 0.0;        // aniso / iso, 0 when both vanish
};

struct AnisoResult {
  std::vector<AnisoRow> rows;
  double aniso_slope = 0.0;  // log ideal vs log q
  double iso_slope = 0.0;
  int attacked_axis = 0;
};

// Ideal-loss comparison between the anisotropic class along the attacked axis
// and the isotropic class with the harmonic-mean exponent, under single-axis
// box attacks. cfg.f must carry an anisotropic spec with beta_bar < 1; the
// perturbation is the box pattern to rescale per q.
AnisoResult aniso_comparison(const ExperimentConfig& cfg, const std::vector<double>& q_grid);

void write_phase_csv(const std::vector<PhaseRow>& rows, const std::string& path);
void write_aniso_csv(const AnisoResult& result, const std::string& path);

}  // namespace advreg
