#include "advreg/functions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "advreg/errors.hpp"

namespace advreg {

SmoothnessSpec SmoothnessSpec::isotropic(double beta, double L, int dim) {
  if (!(beta > 0.0)) throw std::invalid_argument("smoothness: beta must be positive");
  if (!(L > 0.0)) throw std::invalid_argument("smoothness: L must be positive");
  if (dim < 1) throw std::invalid_argument("smoothness: dim must be >= 1");
  SmoothnessSpec s;
  s.cls_ = HolderClass::Isotropic;
  s.dim_ = dim;
  s.beta_ = {beta};
  s.L_ = {L};
  return s;
}

SmoothnessSpec SmoothnessSpec::anisotropic(Vec beta, Vec L) {
  if (beta.empty() || beta.size() != L.size())
    throw DimensionMismatch("smoothness: beta/L length mismatch");
  for (double b : beta)
    if (!(b > 0.0) || b > 1.0)
      throw std::invalid_argument("smoothness: anisotropic beta_i must lie in (0,1]");
  for (double l : L)
    if (!(l > 0.0)) throw std::invalid_argument("smoothness: L_i must be positive");
  SmoothnessSpec s;
  s.cls_ = HolderClass::Anisotropic;
  s.dim_ = static_cast<int>(beta.size());
  s.beta_ = std::move(beta);
  s.L_ = std::move(L);
  return s;
}

double SmoothnessSpec::beta() const {
  if (cls_ != HolderClass::Isotropic)
    throw std::logic_error("smoothness: scalar beta undefined for anisotropic spec");
  return beta_[0];
}

double SmoothnessSpec::lipschitz() const {
  if (cls_ != HolderClass::Isotropic)
    throw std::logic_error("smoothness: scalar L undefined for anisotropic spec");
  return L_[0];
}

int SmoothnessSpec::taylor_degree() const {
  if (cls_ != HolderClass::Isotropic) return 0;  // product-kernel fits are local means
  return static_cast<int>(std::floor(beta_[0]));
}

double SmoothnessSpec::beta_bar() const {
  double s = 0.0;
  for (double b : beta_) s += 1.0 / b;
  if (cls_ == HolderClass::Isotropic) s *= dim_;  // same beta on every axis
  return dim_ / s;
}

RegressionFunction witness_iso_smooth(double beta, double L, int dim) {
  if (!(beta >= 1.0)) throw std::invalid_argument("witness_iso_smooth: beta must be >= 1");
  return RegressionFunction{
      [L](const Vec& x) { return L * std::exp(x[0] - 1.0); },
      SmoothnessSpec::isotropic(beta, L, dim), "f1"};
}

RegressionFunction witness_iso_rough(double beta, int dim) {
  if (!(beta > 0.0) || beta >= 1.0)
    throw std::invalid_argument("witness_iso_rough: beta must lie in (0,1)");
  return RegressionFunction{
      [beta](const Vec& x) { return std::pow(std::max(x[0], 0.0), beta); },
      SmoothnessSpec::isotropic(beta, 1.0, dim), "f2"};
}

RegressionFunction witness_aniso(const SmoothnessSpec& spec, int coord) {
  if (spec.holder_class() != HolderClass::Anisotropic)
    throw std::invalid_argument("witness_aniso: needs an anisotropic spec");
  if (coord < 0 || coord >= spec.dim())
    throw std::invalid_argument("witness_aniso: coordinate out of range");
  const double b = spec.beta_vec()[coord];
  const double L = spec.lipschitz_vec()[coord];
  return RegressionFunction{
      [b, L, coord](const Vec& x) { return L * std::pow(std::max(x[coord], 0.0), b); },
      spec, "f3"};
}

RegressionFunction linear_function(double slope, double intercept, int dim) {
  const double L = std::max(std::fabs(slope), 1e-12);
  return RegressionFunction{
      [slope, intercept](const Vec& x) { return intercept + slope * x[0]; },
      SmoothnessSpec::isotropic(1.0, L, dim), "linear"};
}

RegressionFunction constant_function(double value, int dim) {
  return RegressionFunction{[value](const Vec&) { return value; },
                            SmoothnessSpec::isotropic(1.0, 1.0, dim), "constant"};
}

double Rng::uniform() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(th);
  have_spare_ = true;
  return r * std::cos(th);
}

HolderCheckResult holder_check(const RegressionFunction& f, int pairs, std::uint64_t seed) {
  const int d = f.spec.dim();
  Rng rng(seed);
  HolderCheckResult res;
  Vec x(d), z(d);
  for (int it = 0; it < pairs; ++it) {
    for (int k = 0; k < d; ++k) x[k] = rng.uniform();
    for (int k = 0; k < d; ++k) z[k] = rng.uniform();
    double bound = 0.0;
    if (f.spec.holder_class() == HolderClass::Isotropic) {
      double d2 = 0.0;
      for (int k = 0; k < d; ++k) d2 += (x[k] - z[k]) * (x[k] - z[k]);
      const double expo = std::min(f.spec.beta(), 1.0);
      bound = f.spec.lipschitz() * std::pow(std::sqrt(d2), expo);
    } else {
      for (int k = 0; k < d; ++k)
        bound += f.spec.lipschitz_vec()[k] *
                 std::pow(std::fabs(x[k] - z[k]), f.spec.beta_vec()[k]);
    }
    const double gap = std::fabs(f(x) - f(z)) - bound;
    if (gap > res.gap) {
      res.gap = gap;
      res.x = x;
      res.z = z;
    }
  }
  res.ok = res.gap <= 1e-10;
  return res;
}

Dataset generate(const RegressionFunction& f, std::size_t n, double noise_sd,
                 std::uint64_t seed) {
  if (noise_sd < 0.0) throw std::invalid_argument("generate: noise_sd must be >= 0");
  const int d = f.spec.dim();
  Rng rng(seed);
  Dataset ds;
  ds.noise_sd = noise_sd;
  ds.seed = seed;
  ds.xs.resize(n, Vec(d));
  ds.ys.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) ds.xs[i][k] = rng.uniform();
  for (std::size_t i = 0; i < n; ++i) {
    double y = f(ds.xs[i]);
    if (noise_sd > 0.0) y += noise_sd * rng.gaussian();
    ds.ys[i] = y;
  }
  return ds;
}

}  // namespace advreg
