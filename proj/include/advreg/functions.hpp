#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "advreg/grid.hpp"

namespace advreg {

enum class HolderClass { Isotropic, Anisotropic };

// Smoothness description: isotropic (scalar beta > 0, constant L > 0) or
// anisotropic (per-axis beta_i in (0,1], L_i > 0).
class SmoothnessSpec {
 public:
  static SmoothnessSpec isotropic(double beta, double L, int dim);
  static SmoothnessSpec anisotropic(Vec beta, Vec L);

  HolderClass holder_class() const { return cls_; }
  int dim() const { return dim_; }
  double beta() const;             // isotropic only
  double lipschitz() const;        // isotropic only
  const Vec& beta_vec() const { return beta_; }
  const Vec& lipschitz_vec() const { return L_; }
  int taylor_degree() const;       // floor(beta); local polynomial degree
  double beta_bar() const;         // d / sum(1/beta_i)

 private:
  HolderClass cls_ = HolderClass::Isotropic;
  int dim_ = 1;
  Vec beta_, L_;
};

struct RegressionFunction {
  std::function<double(const Vec&)> eval;
  SmoothnessSpec spec;
  std::string label;
  double operator()(const Vec& x) const { return eval(x); }
};

// Smooth witness L * exp(x1 - 1); Lipschitz with constant L on the unit cube.
RegressionFunction witness_iso_smooth(double beta, double L, int dim);
// Rough witness x1^beta for beta in (0, 1).
RegressionFunction witness_iso_rough(double beta, int dim = 1);
// Anisotropic witness L_j * x_j^{beta_j} along the chosen coordinate (0-based).
RegressionFunction witness_aniso(const SmoothnessSpec& spec, int coord);
RegressionFunction linear_function(double slope, double intercept, int dim);
RegressionFunction constant_function(double value, int dim);

struct HolderCheckResult {
  bool ok = true;
  Vec x, z;
  double gap = 0.0;  // worst |f(x)-f(z)| - bound (positive means violated)
};

// Samples random pairs and checks the smoothness bound claimed by f.spec.
// For isotropic beta > 1 only the Lipschitz consequence (constant L) is tested.
HolderCheckResult holder_check(const RegressionFunction& f, int pairs, std::uint64_t seed);

struct Dataset {
  std::vector<Vec> xs;
  std::vector<double> ys;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  std::size_t size() const { return xs.size(); }
  int dim() const { return xs.empty() ? 0 : static_cast<int>(xs[0].size()); }
};

// n iid points, X uniform on [0,1]^d, Y = f(X) + noise_sd * N(0,1).
// Identical output for identical (f, n, noise_sd, seed).
Dataset generate(const RegressionFunction& f, std::size_t n, double noise_sd,
                 std::uint64_t seed);

// Deterministic generator: explicit uniform and Box-Muller gaussian so the
// stream does not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform();   // [0, 1)
  double gaussian();  // N(0, 1)

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace advreg
