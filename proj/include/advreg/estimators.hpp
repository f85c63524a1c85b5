#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "advreg/functions.hpp"
#include "advreg/grid.hpp"

namespace advreg {

enum class MethodKind { LocalPoly, AnisoKernel, Constant, Exact, Midpoint };

struct MethodInfo {
  MethodKind kind = MethodKind::Constant;
  int degree = 0;
  Vec bandwidths;
  std::string label;
  bool robustified = false;      // set by the midpoint transform
  std::string perturbation;      // description of the set used to robustify
};

// Evaluable fitted estimator. Immutable and cheap to copy (shared impl), so it
// can be evaluated concurrently. Queries outside [0,1]^d are clamped onto the
// cube for data-driven and exact methods; midpoint tables resolve queries by
// exact lookup on their inflated lattice with a nearest-point fallback.
class FittedPredictor {
 public:
  FittedPredictor() = default;

  double operator()(const Vec& x) const;
  const MethodInfo& method() const { return method_; }
  std::size_t training_n() const { return training_n_; }

  static FittedPredictor constant(double value, int dim);
  static FittedPredictor exact(RegressionFunction f);
  // Values tabulated on an (inflated) lattice; used by the midpoint transform.
  static FittedPredictor tabulated(std::shared_ptr<const GridDomain> grid,
                                   std::vector<double> values, MethodInfo info,
                                   std::size_t training_n);

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
  MethodInfo method_;
  std::size_t training_n_ = 0;

  friend FittedPredictor fit_local_poly(const Dataset&, const SmoothnessSpec&, double);
  friend FittedPredictor fit_aniso_kernel(const Dataset&, const SmoothnessSpec&, Vec);
};

double predict(const FittedPredictor& p, const Vec& x);

// c_h * (log n / n)^{1/(2 beta + d)}
double bandwidth_iso(std::size_t n, double beta, int dim, double c_h = 1.0);
// h_i = c_h * (log n / n)^{bbar / (beta_i (2 bbar + d))}; makes h_i^{beta_i}
// equal across axes when c_h = 1.
Vec bandwidth_aniso(std::size_t n, const SmoothnessSpec& spec, double c_h = 1.0);

// Local polynomial fit of degree floor(beta) with a boxcar window of sup-norm
// radius h. Degenerate windows widen by 1.5 up to five times, then fall back
// to the local mean; a window still empty after widening raises
// InsufficientData (tagged with the dataset seed).
FittedPredictor fit_local_poly(const Dataset& data, const SmoothnessSpec& spec, double h);

// Product-boxcar local mean with per-axis bandwidths (same fallback policy).
FittedPredictor fit_aniso_kernel(const Dataset& data, const SmoothnessSpec& spec, Vec h);

}  // namespace advreg
