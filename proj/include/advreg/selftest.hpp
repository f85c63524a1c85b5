#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "advreg/adversarial.hpp"
#include "advreg/estimators.hpp"
#include "advreg/functions.hpp"
#include "advreg/grid.hpp"
#include "advreg/perturbation.hpp"

namespace advreg::selftest {

// Randomized but lattice-commensurate test instances: grids with power-of-two
// spacing and perturbation parameters that are integer multiples of it, so
// every sum x + delta is exactly representable and the order-exchange and
// optimality identities hold bitwise, not just within tolerance.
struct Instance {
  GridDomain domain;
  PerturbationSet set;
  PerturbationSample samp;
  RegressionFunction f;
};

RegressionFunction random_piecewise_linear(Rng& rng, int dim);
PerturbationSet random_set(Rng& rng, int dim, double spacing);
Instance random_instance(Rng& rng, int dim);
FittedPredictor random_table(Rng& rng, std::shared_ptr<const GridDomain> grid);

struct SuiteResult {
  std::string name;
  bool ok = false;
  std::string detail;  // failure description or brief stats
};

// Reduced fixed-seed versions of the invariant checks: order-exchange
// equality, midpoint-predictor optimality, the pathwise risk sandwich, and
// replicate determinism across worker counts.
std::vector<SuiteResult> run_suites(std::uint64_t seed = 42);

// Prints one "suite=<name> status=<ok|fail> <detail>" line per suite.
// Returns true when everything passed.
bool run_and_report(std::ostream& out, std::uint64_t seed = 42);

}  // namespace advreg::selftest
