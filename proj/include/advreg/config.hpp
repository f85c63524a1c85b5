#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advreg/estimators.hpp"
#include "advreg/functions.hpp"
#include "advreg/perturbation.hpp"

namespace advreg {

// The predictor a loss evaluation is run against: either a closed form
// (exact / constant) or a single fit on generated data.
struct PredictorConfig {
  bool present = false;
  MethodKind method = MethodKind::Exact;
  double c_h = 1.0;
  double bandwidth = 0.0;
  double value = 0.0;
  double noise_sd = 0.2;
  std::size_t n = 256;
  std::uint64_t seed = 1;
};

// Everything a config file can carry. Presence flags let each subcommand
// demand exactly the keys it needs. Unknown keys are rejected at load time
// with the offending key named (ConfigError).
struct CliConfig {
  bool has_function = false;
  RegressionFunction f;

  bool has_perturbation = false;
  PerturbationSet perturbation = PerturbationSet::singleton(1);

  bool has_estimator = false;
  MethodKind method = MethodKind::LocalPoly;
  double c_h = 1.0;
  double bandwidth = 0.0;
  double constant_value = 0.0;

  PredictorConfig predictor;

  bool has_n = false;
  std::size_t n = 0;
  std::vector<std::size_t> n_grid;
  int replicates = 1;
  double noise_sd = 0.2;
  std::uint64_t seed = 1;
  int lattice_resolution = 0;
  int sample_resolution = 0;
  std::vector<double> q_grid;
  double q_scale = 0.0;
  double q_exponent = 0.0;
};

// Parses a JSON config. Throws ConfigError for unreadable files, malformed
// JSON, unknown keys, bad types, or invalid parameter combinations.
CliConfig load_config(const std::string& path);

}  // namespace advreg
